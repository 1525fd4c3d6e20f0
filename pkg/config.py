"""프로젝트 기본값과 실행 설정 파일 로드.

설정 파일은 섹션 없는 `key = value` 줄과 `#` 주석으로 이루어진다.
키는 소문자 점 표기(`lsmi.delta`, `train.eta`, `aug.noise_std` ...)이며
CONFIG_SCHEMA에 없는 키는 거부한다.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from dotenv import dotenv_values

from drn_trainer.augment import AugmentConfig
from drn_trainer.losses import DEP_MEASURES
from drn_trainer.trainer import TrainConfig
from errors import ConfigError
from lsmi_estimator.lsmi import (
    DEFAULT_DELTA_GRID,
    DEFAULT_FOLDS,
    DEFAULT_SIGMA_SCALES,
    GRAD_MODES,
    BandwidthRule,
    LsmiConfig,
)

DEFAULT_KSG_K = 5
DEFAULT_BENCHMARK_RHOS = (0.0, 0.5, 0.8)
DEFAULT_BENCHMARK_NS = (500, 2000)
DEFAULT_BENCHMARK_SEEDS = 10
DEFAULT_OUT_DIR = "output"
TRAIN_DATASETS = ("two_moons", "blobs", "csv")


def _scales_text(values) -> str:
    return ",".join(f"{v:g}" for v in values)


# ── 값 파서 ──

def parse_float_list(text: str) -> tuple[float, ...]:
    values = tuple(float(v) for v in text.split(","))
    if not values:
        raise ValueError("빈 목록입니다.")
    return values


def parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(","))


def parse_bandwidth(text: str) -> BandwidthRule:
    """폭 규칙 문법: median | <float> | <f1>,<f2>,... | median*<s1>,<s2>,..."""
    text = text.strip()
    if text == "median":
        return BandwidthRule.median()
    if text.startswith("median*"):
        return BandwidthRule.grid(parse_float_list(text[len("median*"):]), relative=True)
    values = parse_float_list(text)
    if len(values) == 1:
        return BandwidthRule.fixed(values[0])
    return BandwidthRule.grid(values)


def _choice(options: tuple[str, ...]) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"{options} 중 하나여야 합니다")
        return text
    return parse


@dataclass(frozen=True)
class ConfigKey:
    parser: Callable[[str], Any]
    default: str
    description: str


# 공개 스키마: 키 -> (파서, 기본값 문자열, 설명). README의 설정 표와 같은 내용이다.
CONFIG_SCHEMA: dict[str, ConfigKey] = {
    "lsmi.sigma_s": ConfigKey(parse_bandwidth, f"median*{_scales_text(DEFAULT_SIGMA_SCALES)}",
                              "p_s 커널 폭 규칙"),
    "lsmi.sigma_t": ConfigKey(parse_bandwidth, f"median*{_scales_text(DEFAULT_SIGMA_SCALES)}",
                              "p_t 커널 폭 규칙"),
    "lsmi.delta": ConfigKey(parse_float_list, _scales_text(DEFAULT_DELTA_GRID),
                            "정규화 계수 (하나면 고정, 여러 개면 교차검증 격자)"),
    "lsmi.grad_mode": ConfigKey(_choice(GRAD_MODES), "full", "기울기 모드"),
    "lsmi.folds": ConfigKey(int, str(DEFAULT_FOLDS), "교차검증 fold 수"),
    "lsmi.cv_seed": ConfigKey(int, "0", "fold 분할 시드"),
    "lsmi.workers": ConfigKey(int, "1", "교차검증 격자 병렬 작업 수"),
    "ksg.k": ConfigKey(int, str(DEFAULT_KSG_K), "KSG 최근접 이웃 수"),
    "train.lambda_max": ConfigKey(float, "0.5", "일관성 항 최대 계수"),
    "train.beta_max": ConfigKey(float, "0.1", "의존성 항 최대 계수"),
    "train.ramp_epochs": ConfigKey(int, "30", "계수 선형 ramp-up 에폭 수"),
    "train.eta": ConfigKey(float, "0.99", "교사 EMA 감쇠율"),
    "train.epochs": ConfigKey(int, "200", "최대 에폭 수"),
    "train.warmup_epochs": ConfigKey(int, "20", "학습률 warmup 에폭 수"),
    "train.lr_peak": ConfigKey(float, "5e-3", "warmup 후 최대 학습률"),
    "train.wd_start": ConfigKey(float, "2e-5", "가중치 감쇠 시작값"),
    "train.wd_end": ConfigKey(float, "2e-2", "가중치 감쇠 종료값"),
    "train.label_eps": ConfigKey(float, "0.4", "레이블 스무딩 계수"),
    "train.early_stop_patience": ConfigKey(int, "100", "조기 종료 인내 에폭 수"),
    "train.dep_measure": ConfigKey(_choice(DEP_MEASURES), "lsmi", "의존성 항 종류"),
    "train.seed": ConfigKey(int, "0", "학습 시드"),
    "train.batch_size": ConfigKey(int, "32", "미니배치 크기 (2 이상)"),
    "train.hidden": ConfigKey(parse_int_list, "32,32", "몸통 은닉층 폭들"),
    "train.d_proj": ConfigKey(int, "16", "투영 차원"),
    "train.proj_hidden": ConfigKey(int, "32", "투영 머리 은닉 폭"),
    "train.cv_samples": ConfigKey(int, "128", "LSMI 하이퍼파라미터 고정에 쓰는 샘플 수"),
    "aug.noise_std": ConfigKey(float, "0.05", "가우시안 잡음 표준편차"),
    "aug.smooth_radius": ConfigKey(float, "0", "좌표 이동평균 평활 반경"),
    "aug.scale_range": ConfigKey(float, "0.1", "배율 변화 범위"),
    "aug.shift_range": ConfigKey(float, "0.05", "값 이동 범위"),
    "aug.zoom_range": ConfigKey(float, "0", "좌표 확대 범위 (1 미만)"),
    "data.n_train": ConfigKey(int, "400", "합성 학습 샘플 수"),
    "data.n_val": ConfigKey(int, "400", "합성 검증 샘플 수"),
    "data.noise": ConfigKey(float, "0.3", "two_moons 잡음"),
    "data.n_classes": ConfigKey(int, "4", "blobs 클래스 수"),
    "data.spread": ConfigKey(float, "0.6", "blobs 퍼짐"),
    "data.val_fraction": ConfigKey(float, "0.5", "csv 데이터의 검증 비율"),
}


@dataclass(frozen=True)
class DataConfig:
    n_train: int = 400
    n_val: int = 400
    noise: float = 0.3
    n_classes: int = 4
    spread: float = 0.6
    val_fraction: float = 0.5


@dataclass(frozen=True)
class RunConfig:
    """검증을 마친 실행 설정."""
    lsmi: LsmiConfig
    ksg_k: int = DEFAULT_KSG_K
    train: TrainConfig = field(default_factory=TrainConfig)
    data: DataConfig = field(default_factory=DataConfig)


def _parse_values(raw: dict[str, str | None]) -> dict[str, Any]:
    values = {key: spec.parser(spec.default) for key, spec in CONFIG_SCHEMA.items()}
    for key, text in raw.items():
        if key not in CONFIG_SCHEMA:
            raise ConfigError(key, "알 수 없는 키입니다.")
        if text is None or not text.strip():
            raise ConfigError(key, "값이 비어 있습니다.")
        try:
            values[key] = CONFIG_SCHEMA[key].parser(text.strip())
        except ValueError as e:
            raise ConfigError(key, f"잘못된 값 {text!r}: {e}") from None
    return values


def _section(values: dict[str, Any], prefix: str) -> dict[str, Any]:
    return {k[len(prefix) + 1:]: v for k, v in values.items() if k.startswith(prefix + ".")}


def _build(prefix: str, factory, **kwargs):
    try:
        return factory(**kwargs)
    except ValueError as e:
        raise ConfigError(prefix, str(e)) from None


def load_run_config(path=None) -> RunConfig:
    """설정 파일을 읽어 RunConfig를 만든다. path가 None이면 기본값만 쓴다.

    Raises:
        FileNotFoundError: 설정 파일이 없을 때
        ConfigError: 알 수 없는 키, 해석할 수 없는 값, 값 사이의 제약 위반
    """
    raw: dict[str, str | None] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"설정 파일을 찾을 수 없습니다: {path}")
        raw = dict(dotenv_values(path, interpolate=False))
    values = _parse_values(raw)

    lsmi = _build("lsmi", LsmiConfig, **_section(values, "lsmi"))
    aug = _build("aug", AugmentConfig, **_section(values, "aug"))
    train = _build("train", TrainConfig, lsmi_cfg=lsmi, aug=aug, **_section(values, "train"))
    data = _build("data", DataConfig, **_section(values, "data"))
    if values["ksg.k"] < 1:
        raise ConfigError("ksg.k", f"1 이상이어야 합니다: {values['ksg.k']}")
    if data.n_train < 2 or data.n_val < 1 or not 0.0 < data.val_fraction < 1.0:
        raise ConfigError("data", "n_train >= 2, n_val >= 1, 0 < val_fraction < 1 이어야 합니다.")
    return RunConfig(lsmi=lsmi, ksg_k=values["ksg.k"], train=train, data=data)

