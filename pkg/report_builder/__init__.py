"""벤치마크 결과 노트북 생성 패키지."""

from .builder import build_benchmark_report
