"""유틸리티 모듈"""

from .config import Config, DataConfig, EnsembleConfig, load_config, split_overrides
from .visualization import Visualizer

__all__ = ['Config', 'DataConfig', 'EnsembleConfig', 'load_config', 'split_overrides', 'Visualizer']
