"""해석적 기울기와 중심차분 기울기의 비교.

대상:
  - lsmi:  LSMI 점수의 Ps 기울기 (n=16, d=3)
  - net:   2-8-(2,4) 네트워크, 6개 샘플, 고정 상류 기울기
  - total: 4개 샘플의 복합 손실 (CE + 일관성 + LSMI)을 학생 파라미터로 미분
블록별 최대 상대오차를 보고하며, 모두 GRADCHECK_TOLERANCE 이하이면 통과다.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from data_generator.synthetic import make_rng
from lsmi_estimator.lsmi import LsmiConfig, lsmi_estimate, lsmi_gradient, resolve_hyperparameters
from lsmi_estimator.oracles import finite_diff_grad, max_relative_error
from .losses import total_loss
from .net import NetworkParams, NetworkSpec, backward, forward, init_params
from .trainer import TrainConfig

logger = logging.getLogger(__name__)

GRADCHECK_TARGETS = ("lsmi", "net", "total")
GRADCHECK_TOLERANCE = 1e-4
FD_STEP = 1e-5

_NET_FIXTURE = NetworkSpec(d_in=2, hidden=(8,), n_classes=2, d_proj=4, proj_hidden=8)


@dataclass
class BlockError:
    name: str
    size: int
    max_rel_error: float


@dataclass
class GradcheckReport:
    target: str
    blocks: list[BlockError] = field(default_factory=list)
    tolerance: float = GRADCHECK_TOLERANCE

    @property
    def max_error(self) -> float:
        return max((b.max_rel_error for b in self.blocks), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance


def _compare(name: str, analytic, numeric) -> BlockError:
    analytic = np.asarray(analytic, dtype=np.float64)
    return BlockError(name, analytic.size, max_relative_error(analytic, numeric))


def _jittered_params(spec: NetworkSpec, rng: np.random.Generator) -> NetworkParams:
    """초기 편향이 0이면 일부 경로가 검사되지 않으므로 모든 파라미터에 작은 잡음을 더한다."""
    return {k: v + 0.1 * rng.standard_normal(v.shape) for k, v in init_params(spec, rng).items()}


def _check_params(f, params: NetworkParams, grads: NetworkParams, h: float) -> list[BlockError]:
    blocks = []
    for name in params:
        numeric = finite_diff_grad(lambda W, name=name: f({**params, name: W}), params[name], h)
        blocks.append(_compare(name, grads[name], numeric))
    return blocks


def check_lsmi(seed: int = 0, h: float = FD_STEP) -> GradcheckReport:
    rng = make_rng(seed)
    Ps = rng.standard_normal((16, 3))
    Pt = Ps + 0.5 * rng.standard_normal((16, 3))
    cfg = resolve_hyperparameters(Ps, Pt, LsmiConfig(delta=(1e-1,)))
    _, analytic = lsmi_gradient(Ps, Pt, cfg)
    numeric = finite_diff_grad(lambda X: lsmi_estimate(X, Pt, cfg).value, Ps, h)
    return GradcheckReport("lsmi", [_compare("dPs", analytic, numeric)])


def check_net(seed: int = 0, h: float = FD_STEP) -> GradcheckReport:
    rng = make_rng(seed)
    params = _jittered_params(_NET_FIXTURE, rng)
    X = rng.standard_normal((6, _NET_FIXTURE.d_in))
    w_logits = rng.standard_normal((6, _NET_FIXTURE.n_classes))
    w_proj = rng.standard_normal((6, _NET_FIXTURE.d_proj))

    def scalar(theta: NetworkParams, inputs=X) -> float:
        out, _ = forward(theta, inputs)
        return float(np.sum(w_logits * out.logits) + np.sum(w_proj * out.projection))

    _, trace = forward(params, X)
    grads, dX = backward(trace, w_logits, w_proj)
    blocks = _check_params(scalar, params, grads, h)
    blocks.append(_compare("input", dX, finite_diff_grad(lambda Z: scalar(params, Z), X, h)))
    return GradcheckReport("net", blocks)


def check_total(seed: int = 0, h: float = FD_STEP, dep_measure: str = "lsmi") -> GradcheckReport:
    rng = make_rng(seed)
    theta_s = _jittered_params(_NET_FIXTURE, rng)
    theta_t = {k: v + 0.05 * rng.standard_normal(v.shape) for k, v in theta_s.items()}
    X = rng.standard_normal((4, _NET_FIXTURE.d_in))
    xs = X + 0.1 * rng.standard_normal(X.shape)
    xt = X + 0.1 * rng.standard_normal(X.shape)
    labels = np.array([0, 1, 0, 1])
    cfg = TrainConfig(ramp_epochs=0, epochs=2, warmup_epochs=0, dep_measure=dep_measure)

    out_t, _ = forward(theta_t, xt)
    out_s, trace = forward(theta_s, xs)
    lsmi_cfg = resolve_hyperparameters(out_s.projection, out_t.projection, LsmiConfig(delta=(1e-1,)))

    def objective(theta: NetworkParams) -> float:
        out, _ = forward(theta, xs)
        loss, _, _ = total_loss(out.logits, out_t.logits, out.projection, out_t.projection,
                                labels, cfg, 0, lsmi_cfg)
        return loss.total

    _, d_logits, d_proj = total_loss(out_s.logits, out_t.logits, out_s.projection, out_t.projection,
                                     labels, cfg, 0, lsmi_cfg)
    grads, _ = backward(trace, d_logits, d_proj)
    return GradcheckReport("total", _check_params(objective, theta_s, grads, h))


def run_gradcheck(target: str, seed: int = 0) -> GradcheckReport:
    checks = {"lsmi": check_lsmi, "net": check_net, "total": check_total}
    if target not in checks:
        raise ValueError(f"target은 {GRADCHECK_TARGETS} 중 하나여야 합니다: {target}")
    report = checks[target](seed)
    logger.info("gradcheck %s: 최대 상대오차 %.3e (%s)", target, report.max_error,
                "통과" if report.passed else "실패")
    return report
