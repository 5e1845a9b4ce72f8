"""uapoint: uncertainty-aware few-shot domain adaptation for point clouds via multi-view depth maps."""

__version__ = "0.1.0"
__author__ = "uapoint Team"
