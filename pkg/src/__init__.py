"""
Pest Image Classification Lab
해충 이미지 분류 실험 도구: 자동 미분, 어텐션 백본, 학습 루프, ROI 정제, 앙상블 평가
"""

__version__ = "0.2.0"
