"""
예외 클래스 모음
라이브러리 전반에서 사용하는 구조화된 오류 정의
"""

from typing import Iterable, List, Optional, Sequence


class PestLabError(Exception):
    """모든 라이브러리 오류의 기본 클래스"""


class ShapeError(PestLabError, ValueError):
    """
    텐서 형상 불일치 오류

    Args:
        message: 오류 설명
        shapes: 문제가 된 형상들 (오류 메시지에 함께 표기)
    """

    def __init__(self, message: str, *shapes: Sequence[int]):
        self.shapes = [tuple(s) for s in shapes]
        if self.shapes:
            detail = " vs ".join(str(s) for s in self.shapes)
            message = f"{message}: {detail}"
        super().__init__(message)


class DomainError(PestLabError, ValueError):
    """정의역을 벗어난 연산 (예: 0 이하 값의 log, 범위 밖 라벨)"""


class ConfigurationError(PestLabError, ValueError):
    """
    설정/하이퍼파라미터 검증 오류
    여러 문제를 한 번에 모아서 보고
    """

    def __init__(self, problems: "str | Iterable[str]"):
        if isinstance(problems, str):
            problems = [problems]
        self.problems: List[str] = list(problems)
        if len(self.problems) == 1:
            message = self.problems[0]
        else:
            message = f"{len(self.problems)}개의 설정 오류:\n" + "\n".join(
                f"  - {p}" for p in self.problems
            )
        super().__init__(message)


class ContractError(PestLabError, RuntimeError):
    """API 사용 계약 위반 (스칼라가 아닌 텐서의 backward 등)"""


class CheckpointFormatError(PestLabError, ValueError):
    """체크포인트 파일 파싱 오류 (바이트 오프셋 포함)"""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (offset {offset})")


class ManifestError(PestLabError, ValueError):
    """매니페스트/주석 파일 파싱 오류"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
