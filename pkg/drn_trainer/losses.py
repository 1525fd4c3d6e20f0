"""이중 역할 네트워크의 복합 손실.

J = CE(y_s, y) + lambda * MSE(softmax y_s, softmax y_t) + beta * d_l(p_s, p_t)

d_l 부호 규약: LSMI는 의존성을 최대화해야 하므로 d_l = -LSMI,
KL/JSD는 두 시점의 분포를 맞추므로 d_l = +divergence 이다.
교사 쪽 텐서(y_t, p_t)에는 기울기가 흐르지 않는다.
"""

from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import log_softmax, softmax

from errors import PairingError
from lsmi_estimator.lsmi import LsmiConfig, lsmi_gradient
from .net import ce_label_smoothing, mse_consistency, softmax_vjp
from .schedules import lr_schedule, ramp, wd_schedule

if TYPE_CHECKING:
    from .trainer import TrainConfig

DEP_MEASURES = ("lsmi", "kl", "jsd", "none")


@dataclass
class LossBreakdown:
    """배치 하나의 손실 항목. total = ce + lambda_eff * cons + beta_eff * dep."""
    ce: float
    cons: float
    dep: float
    total: float
    lr: float
    wd: float
    lambda_eff: float
    beta_eff: float

    def as_dict(self) -> dict:
        return asdict(self)


def alt_divergence(ps, pt, kind: str) -> tuple[float, np.ndarray]:
    """투영 벡터 행을 softmax 분포로 보고 KL 또는 JSD의 배치 평균을 계산한다.

    Returns:
        (value, dPs): 기울기는 ps에 대해서만
    """
    ps = np.asarray(ps, dtype=np.float64)
    pt = np.asarray(pt, dtype=np.float64)
    if ps.shape != pt.shape:
        raise PairingError(f"ps, pt 형상이 다릅니다: {ps.shape} vs {pt.shape}")
    n = ps.shape[0]
    log_p = log_softmax(ps, axis=1)
    log_q = log_softmax(pt, axis=1)
    P = np.exp(log_p)
    if kind == "kl":
        a = log_p - log_q
        value = np.sum(P * a) / n
    elif kind == "jsd":
        Q = np.exp(log_q)
        log_m = np.log(0.5 * (P + Q))
        value = 0.5 * (np.sum(P * (log_p - log_m)) + np.sum(Q * (log_q - log_m))) / n
        a = 0.5 * (log_p - log_m)
    else:
        raise ValueError(f"kind는 kl 또는 jsd여야 합니다: {kind}")
    return float(value), softmax_vjp(P, a) / n


def dependence_term(ps, pt, measure: str, lsmi_cfg: LsmiConfig | None = None) -> tuple[float, np.ndarray]:
    """d_l 값과 ps에 대한 기울기."""
    if measure == "lsmi":
        score, grad = lsmi_gradient(ps, pt, lsmi_cfg)
        return -score, -grad
    if measure in ("kl", "jsd"):
        return alt_divergence(ps, pt, measure)
    if measure == "none":
        return 0.0, np.zeros_like(np.asarray(ps, dtype=np.float64))
    raise ValueError(f"dep_measure는 {DEP_MEASURES} 중 하나여야 합니다: {measure}")


def total_loss(
    ys_logits,
    yt_logits,
    ps,
    pt,
    labels,
    cfg: "TrainConfig",
    epoch: int,
    lsmi_cfg: LsmiConfig | None = None,
) -> tuple[LossBreakdown, np.ndarray, np.ndarray]:
    """복합 손실과 학생 출력(로짓, 투영)에 대한 정확한 기울기.

    Args:
        ys_logits, yt_logits: 학생/교사 로짓 (n, C)
        ps, pt: 학생/교사 투영 (n, d_proj)
        labels: 정수 레이블 (n,)
        cfg: TrainConfig (lambda_max, beta_max, ramp_epochs, label_eps, dep_measure, 스케줄)
        epoch: ramp-up과 스케줄 계산용 에폭
        lsmi_cfg: 고정된 LSMI 하이퍼파라미터. 없으면 cfg.lsmi_cfg

    Returns:
        (LossBreakdown, dLogits, dProjection)
    """
    ys_logits = np.asarray(ys_logits, dtype=np.float64)
    yt_logits = np.asarray(yt_logits, dtype=np.float64)
    n = ys_logits.shape[0]
    if yt_logits.shape != ys_logits.shape or np.shape(ps)[0] != n or np.shape(pt)[0] != n:
        raise PairingError("학생/교사 출력의 샘플 수가 서로 다릅니다.")

    lambda_eff = ramp(epoch, cfg.ramp_epochs, cfg.lambda_max)
    beta_eff = ramp(epoch, cfg.ramp_epochs, cfg.beta_max)

    ce, d_logits = ce_label_smoothing(ys_logits, labels, cfg.label_eps)

    probs_s = softmax(ys_logits, axis=1)
    probs_t = softmax(yt_logits, axis=1)
    cons, d_probs = mse_consistency(probs_s, probs_t)
    d_logits = d_logits + lambda_eff * softmax_vjp(probs_s, d_probs)

    dep, d_ps = dependence_term(ps, pt, cfg.dep_measure, lsmi_cfg or cfg.lsmi_cfg)
    d_proj = beta_eff * d_ps

    breakdown = LossBreakdown(
        ce=ce,
        cons=cons,
        dep=dep,
        total=ce + lambda_eff * cons + beta_eff * dep,
        lr=lr_schedule(epoch, cfg),
        wd=wd_schedule(epoch, cfg),
        lambda_eff=lambda_eff,
        beta_eff=beta_eff,
    )
    return breakdown, d_logits, d_proj
