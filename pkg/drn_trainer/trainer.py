"""이중 역할 네트워크(DRN) 학습 루프.

학생 네트워크는 AdamW로, 교사 네트워크는 매 스텝 학생의 지수이동평균(EMA)으로 갱신한다.
각 샘플을 두 시점으로 증강해 학생은 x_s, 교사는 x_t를 보고,
복합 손실(교차엔트로피 + 일관성 + 의존성)의 기울기는 학생에게만 흐른다.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from sklearn.metrics import accuracy_score, f1_score
from tqdm import tqdm

from data_generator.synthetic import LabeledDataset, make_rng
from errors import NonFiniteError, NumericError, TrainingDivergedError
from lsmi_estimator.lsmi import LsmiConfig, resolve_hyperparameters
from .augment import AugmentConfig, augment_batch
from .losses import DEP_MEASURES, total_loss
from .net import (
    NetworkParams,
    NetworkSpec,
    OptimState,
    adamw_step,
    backward,
    copy_params,
    forward,
    init_optim_state,
    init_params,
)
from .schedules import lr_schedule, ramp, wd_schedule

logger = logging.getLogger(__name__)

VARIANT_NAMES = {
    "lsmi": "DRN-MSE-LSMI",
    "kl": "DRN-MSE-KL",
    "jsd": "DRN-MSE-JSD",
}


@dataclass(frozen=True)
class TrainConfig:
    """학습 설정. 기본값은 데스크 규모 실험용이며, full_scale()은 대규모 학습 설정값을 준다."""
    lambda_max: float = 0.5
    beta_max: float = 0.1
    ramp_epochs: int = 30
    eta: float = 0.99
    epochs: int = 200
    warmup_epochs: int = 20
    lr_peak: float = 5e-3
    wd_start: float = 2e-5
    wd_end: float = 2e-2
    label_eps: float = 0.4
    early_stop_patience: int = 100
    dep_measure: str = "lsmi"
    lsmi_cfg: LsmiConfig = field(default_factory=LsmiConfig)
    aug: AugmentConfig = field(default_factory=AugmentConfig)
    seed: int = 0
    batch_size: int = 32
    hidden: tuple[int, ...] = (32, 32)
    d_proj: int = 16
    proj_hidden: int = 32
    cv_samples: int = 128

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta는 [0, 1] 범위여야 합니다: {self.eta}")
        if self.lambda_max < 0.0 or self.beta_max < 0.0:
            raise ValueError("lambda_max, beta_max는 0 이상이어야 합니다.")
        if self.epochs < 1 or not 0 <= self.warmup_epochs < self.epochs:
            raise ValueError(f"0 <= warmup_epochs < epochs 여야 합니다: {self.warmup_epochs}, {self.epochs}")
        if self.dep_measure not in DEP_MEASURES:
            raise ValueError(f"dep_measure는 {DEP_MEASURES} 중 하나여야 합니다: {self.dep_measure}")
        if self.batch_size < 2:
            raise ValueError(f"batch_size는 2 이상이어야 합니다: {self.batch_size}")

    @classmethod
    def full_scale(cls, **overrides) -> "TrainConfig":
        """대규모 학습 설정값 (느린 EMA, 300 에폭, 작은 학습률)."""
        values = dict(
            eta=0.9998,
            epochs=300,
            early_stop_patience=100,
            lr_peak=4e-5,
            warmup_epochs=20,
            wd_start=2e-5,
            wd_end=2e-2,
            ramp_epochs=30,
            label_eps=0.4,
            d_proj=256,
        )
        values.update(overrides)
        return cls(**values)

    @property
    def variant(self) -> str:
        if self.dep_measure in VARIANT_NAMES:
            return VARIANT_NAMES[self.dep_measure]
        return "CE-only" if self.lambda_max == 0.0 else "DRN-MSE"


@dataclass
class DualState:
    """학생/교사 파라미터, 옵티마이저 상태, 스텝 수 tau, 에폭."""
    theta_s: NetworkParams
    theta_t: NetworkParams
    optim: OptimState
    tau: int = 0
    epoch: int = 0


@dataclass
class EpochRecord:
    """에폭별 학습 기록 (손실 항목은 스텝 평균)."""
    epoch: int
    lr: float
    wd: float
    lambda_eff: float
    beta_eff: float
    ce: float
    cons: float
    dep: float
    total: float
    train_acc: float
    val_acc: float
    val_macro_f1: float


def ema_update(theta_t: NetworkParams, theta_s: NetworkParams, eta: float) -> NetworkParams:
    """theta_t <- eta * theta_t + (1 - eta) * theta_s (모든 파라미터)."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta는 [0, 1] 범위여야 합니다: {eta}")
    if theta_t.keys() != theta_s.keys():
        raise ValueError("학생과 교사의 파라미터 구성이 다릅니다.")
    updated = {}
    for name, t in theta_t.items():
        s = theta_s[name]
        if t.shape != s.shape:
            raise ValueError(f"{name} 형상이 다릅니다: {t.shape} vs {s.shape}")
        updated[name] = eta * t + (1.0 - eta) * s
    return updated


def macro_f1(y_true, y_pred, n_classes: int) -> float:
    """클래스별 F1의 단순 평균. 정답과 예측 모두에 없는 클래스는 F1 = 0."""
    return float(f1_score(y_true, y_pred, labels=list(range(n_classes)),
                          average="macro", zero_division=0))


def evaluate(theta: NetworkParams, dataset: LabeledDataset) -> tuple[float, float]:
    """분류 머리의 argmax 예측으로 (macro F1, 정확도)를 계산한다."""
    if len(dataset) == 0:
        raise ValueError("빈 데이터셋은 평가할 수 없습니다.")
    out, _ = forward(theta, dataset.features)
    pred = np.argmax(out.logits, axis=1)
    return macro_f1(dataset.labels, pred, dataset.n_classes), float(accuracy_score(dataset.labels, pred))


def _fix_lsmi_hyperparameters(
    cfg: TrainConfig,
    state: DualState,
    train_set: LabeledDataset,
    rng: np.random.Generator,
) -> LsmiConfig:
    """초기 투영 스냅샷에서 LSMI 하이퍼파라미터를 한 번 정하고 학습 내내 재사용한다."""
    idx = rng.permutation(len(train_set))[: cfg.cv_samples]
    xs, xt = augment_batch(train_set.features[idx], cfg.aug, rng)
    ps = forward(state.theta_s, xs)[0].projection
    pt = forward(state.theta_t, xt)[0].projection
    fixed = resolve_hyperparameters(ps, pt, cfg.lsmi_cfg)
    logger.info(
        "LSMI 하이퍼파라미터 고정: sigma_s=%.6g sigma_t=%.6g delta=%.3g",
        fixed.sigma_s.values[0], fixed.sigma_t.values[0], fixed.delta[0],
    )
    return fixed


def train(
    cfg: TrainConfig,
    train_set: LabeledDataset,
    val_set: LabeledDataset,
    callback: Callable[[DualState], None] | None = None,
    quiet: bool = True,
) -> tuple[DualState, list[EpochRecord]]:
    """DRN을 학습하고 검증 macro F1이 가장 좋았던 상태와 전체 기록을 반환한다.

    에폭마다 학습 데이터를 섞어 batch_size 단위로 스텝을 밟으며, 크기 1인 마지막 배치는 건너뛴다.
    검증 macro F1이 early_stop_patience 에폭 동안 개선되지 않으면 멈춘다 (동률은 이전 에폭 유지).

    Args:
        cfg: 학습 설정
        train_set, val_set: 레이블 데이터셋
        callback: 매 스텝 직후 갱신된 DualState로 호출된다
        quiet: False이면 에폭 진행 막대를 표시한다

    Raises:
        ValueError: 빈 데이터셋
        TrainingDivergedError: 손실이나 기울기가 유한하지 않을 때 (해당 스텝 번호 포함)
    """
    if len(train_set) == 0 or len(val_set) == 0:
        raise ValueError("학습/검증 데이터셋이 비어 있습니다.")
    rng = make_rng(cfg.seed)
    spec = NetworkSpec(
        d_in=train_set.features.shape[1],
        hidden=tuple(cfg.hidden),
        n_classes=max(train_set.n_classes, val_set.n_classes),
        d_proj=cfg.d_proj,
        proj_hidden=cfg.proj_hidden,
    )
    theta_s = init_params(spec, rng)
    state = DualState(theta_s, copy_params(theta_s), init_optim_state(theta_s))
    val_set = replace(val_set, n_classes=spec.n_classes)
    train_eval = replace(train_set, n_classes=spec.n_classes)

    lsmi_cfg = cfg.lsmi_cfg
    if cfg.dep_measure == "lsmi":
        lsmi_cfg = _fix_lsmi_hyperparameters(cfg, state, train_set, rng)
        logger.info("d_l = -LSMI (의존성 최대화)")
    elif cfg.dep_measure in ("kl", "jsd"):
        logger.info("d_l = +%s (시점 분포 정렬)", cfg.dep_measure.upper())

    n = len(train_set)
    history: list[EpochRecord] = []
    best_state, best_f1, best_epoch = None, -np.inf, -1

    for epoch in tqdm(range(cfg.epochs), desc=cfg.variant, disable=quiet):
        lr = lr_schedule(epoch, cfg)
        wd = wd_schedule(epoch, cfg)
        sums = np.zeros(4)
        steps = 0
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            if idx.size < 2:
                continue
            xs, xt = augment_batch(train_set.features[idx], cfg.aug, rng)
            step = state.tau + 1
            try:
                out_s, trace = forward(state.theta_s, xs)
                out_t, _ = forward(state.theta_t, xt)
                loss, d_logits, d_proj = total_loss(
                    out_s.logits, out_t.logits, out_s.projection, out_t.projection,
                    train_set.labels[idx], cfg, epoch, lsmi_cfg,
                )
            except (NonFiniteError, NumericError) as e:
                raise TrainingDivergedError(step, str(e)) from None
            if not np.isfinite(loss.total):
                raise TrainingDivergedError(step, str(loss.as_dict()))
            grads, _ = backward(trace, d_logits, d_proj)
            try:
                theta_s, optim = adamw_step(state.theta_s, grads, state.optim, lr, wd)
            except NonFiniteError as e:
                raise TrainingDivergedError(step, str(e)) from None
            state = DualState(theta_s, ema_update(state.theta_t, theta_s, cfg.eta), optim, step, epoch)
            sums += (loss.ce, loss.cons, loss.dep, loss.total)
            steps += 1
            if callback is not None:
                callback(state)

        means = sums / max(steps, 1)
        val_f1, val_acc = evaluate(state.theta_s, val_set)
        record = EpochRecord(
            epoch=epoch,
            lr=lr,
            wd=wd,
            lambda_eff=ramp(epoch, cfg.ramp_epochs, cfg.lambda_max),
            beta_eff=ramp(epoch, cfg.ramp_epochs, cfg.beta_max),
            ce=float(means[0]),
            cons=float(means[1]),
            dep=float(means[2]),
            total=float(means[3]),
            train_acc=evaluate(state.theta_s, train_eval)[1],
            val_acc=val_acc,
            val_macro_f1=val_f1,
        )
        history.append(record)

        if val_f1 > best_f1:
            best_f1, best_epoch = val_f1, epoch
            best_state = DualState(
                copy_params(state.theta_s), copy_params(state.theta_t),
                state.optim, state.tau, epoch,
            )
        elif epoch - best_epoch >= cfg.early_stop_patience:
            logger.info("조기 종료: %d 에폭 동안 개선 없음 (최고 %.4f @ %d)",
                        cfg.early_stop_patience, best_f1, best_epoch)
            break

    return best_state, history
