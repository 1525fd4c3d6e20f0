"""프로젝트 공통 예외 정의.

추정기/학습기/데이터 패키지가 던지는 예외를 한곳에 모은다.
CLI(main.py)는 예외 종류에 따라 종료 코드를 결정한다.
"""


class InvalidBandwidthError(ValueError):
    """커널 폭(sigma)이 0 이하이거나 유한하지 않음."""


class InsufficientSamplesError(ValueError):
    """연산에 필요한 최소 샘플 수 미달."""


class PairingError(ValueError):
    """짝을 이뤄야 하는 두 배치의 샘플 수가 다름."""


class FoldError(ValueError):
    """교차검증 fold 수가 샘플 수보다 많거나 2 미만."""


class DegenerateMarginalError(ValueError):
    """주변확률에 0이 포함되어 밀도비가 정의되지 않음."""


class ShapeError(ValueError):
    """행렬/벡터 형상이 서로 맞지 않음."""


class NonFiniteError(ValueError):
    """입력 또는 함수값에 NaN/inf가 포함됨."""


class InvalidPmfError(ValueError):
    """결합확률표가 음수를 포함하거나 합이 1이 아님."""


class NumericError(RuntimeError):
    """양정치 분해 실패.

    Attributes:
        min_pivot: 분해 대상 행렬의 가장 작은 고유값 (실패 원인 진단용)
    """

    def __init__(self, message: str, min_pivot: float):
        super().__init__(f"{message} (최소 피벗: {min_pivot:.3e})")
        self.min_pivot = min_pivot


class TrainingDivergedError(RuntimeError):
    """학습 중 손실이 유한하지 않게 됨."""

    def __init__(self, step: int, detail: str):
        super().__init__(f"step {step}에서 손실이 발산했습니다: {detail}")
        self.step = step


class ConfigError(ValueError):
    """설정 파일의 키 또는 값이 스키마와 맞지 않음."""

    def __init__(self, key: str, message: str):
        super().__init__(f"설정 오류 [{key}]: {message}")
        self.key = key


class DataFormatError(ValueError):
    """CSV 입력 파일 형식 오류.

    row는 헤더를 제외한 1부터 시작하는 데이터 행 번호이며,
    헤더 자체의 문제이면 0이다.
    """

    def __init__(self, path: str, row: int, message: str):
        where = "헤더" if row == 0 else f"row {row}"
        super().__init__(f"{path}: {where}: {message}")
        self.path = path
        self.row = row
