"""작은 순전파 신경망과 수작업 역전파.

구조: 몸통(trunk, GELU 은닉층들) 위에 두 개의 머리가 붙는다.
  - 분류 머리: 선형 -> C개 로짓 (y_hat)
  - 투영 머리: 선형 -> 레이어 정규화 -> GELU -> 선형 -> d_proj 차원 (p)
파라미터는 이름 -> 배열의 dict이며, 모든 계산은 float64로 한다.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import log_softmax, ndtr

from errors import NonFiniteError, ShapeError

LAYER_NORM_EPS = 1e-5
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

NetworkParams = dict[str, np.ndarray]


@dataclass(frozen=True)
class NetworkSpec:
    """네트워크 형상. hidden은 몸통 은닉층 폭들이다."""
    d_in: int
    hidden: tuple[int, ...] = (32, 32)
    n_classes: int = 2
    d_proj: int = 16
    proj_hidden: int = 32

    def __post_init__(self):
        if self.d_in < 1 or self.n_classes < 2 or self.d_proj < 1 or self.proj_hidden < 2:
            raise ShapeError(f"잘못된 네트워크 형상입니다: {self}")


@dataclass
class HeadOutputs:
    logits: np.ndarray
    projection: np.ndarray


@dataclass
class ForwardTrace:
    """backward에 필요한 순전파 중간값."""
    params: NetworkParams
    inputs: list[np.ndarray] = field(default_factory=list)
    pre_acts: list[np.ndarray] = field(default_factory=list)
    features: np.ndarray | None = None
    norm_cache: tuple | None = None
    proj_pre: np.ndarray | None = None
    proj_act: np.ndarray | None = None
    logits_shape: tuple = ()
    projection_shape: tuple = ()


def n_trunk_layers(params: NetworkParams) -> int:
    return sum(1 for name in params if name.startswith("trunk.") and name.endswith(".weight"))


def init_params(spec: NetworkSpec, rng: np.random.Generator) -> NetworkParams:
    """Glorot 균등 초기화: 가중치 ~ U(-a, a), a = sqrt(6 / (fan_in + fan_out)). 편향은 0."""

    def glorot(fan_in, fan_out):
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, size=(fan_in, fan_out))

    params: NetworkParams = {}
    width = spec.d_in
    for i, h in enumerate(spec.hidden):
        params[f"trunk.{i}.weight"] = glorot(width, h)
        params[f"trunk.{i}.bias"] = np.zeros(h)
        width = h
    params["cls.weight"] = glorot(width, spec.n_classes)
    params["cls.bias"] = np.zeros(spec.n_classes)
    params["proj.0.weight"] = glorot(width, spec.proj_hidden)
    params["proj.0.bias"] = np.zeros(spec.proj_hidden)
    params["proj.norm.gain"] = np.ones(spec.proj_hidden)
    params["proj.norm.offset"] = np.zeros(spec.proj_hidden)
    params["proj.1.weight"] = glorot(spec.proj_hidden, spec.d_proj)
    params["proj.1.bias"] = np.zeros(spec.d_proj)
    return params


def copy_params(params: NetworkParams) -> NetworkParams:
    return {name: value.copy() for name, value in params.items()}


def gelu(x):
    """정확한 erf 형태의 GELU: x * Phi(x)."""
    return x * ndtr(x)


def gelu_grad(x):
    """d/dx [x Phi(x)] = Phi(x) + x phi(x)."""
    return ndtr(x) + x * _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def layer_norm(v, gain, offset) -> tuple[np.ndarray, tuple]:
    """마지막 축 기준 레이어 정규화 (편향 분산, eps=1e-5) 후 affine 변환.

    Returns:
        (출력, layer_norm_grad에 넘길 캐시)
    """
    v = np.asarray(v, dtype=np.float64)
    mean = v.mean(axis=-1, keepdims=True)
    var = v.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + LAYER_NORM_EPS)
    xhat = (v - mean) * inv_std
    return xhat * gain + offset, (xhat, inv_std, gain)


def layer_norm_grad(cache: tuple, dout) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(dv, dgain, doffset). 배치 입력이면 dgain, doffset은 행 방향 합이다."""
    xhat, inv_std, gain = cache
    dxhat = dout * gain
    dv = inv_std * (
        dxhat
        - dxhat.mean(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
    )
    lead = tuple(range(dout.ndim - 1))
    return dv, (dout * xhat).sum(axis=lead), dout.sum(axis=lead)


def forward(params: NetworkParams, X) -> tuple[HeadOutputs, ForwardTrace]:
    """결정적 순전파. trace에 역전파용 중간값을 저장한다."""
    a = np.asarray(X, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"입력은 (n, d_in) 행렬이어야 합니다: {a.shape}")
    trace = ForwardTrace(params=params)
    for i in range(n_trunk_layers(params)):
        W = params[f"trunk.{i}.weight"]
        if a.shape[1] != W.shape[0]:
            raise ShapeError(f"trunk.{i} 입력 폭 {W.shape[0]}과 맞지 않습니다: {a.shape}")
        trace.inputs.append(a)
        z = a @ W + params[f"trunk.{i}.bias"]
        trace.pre_acts.append(z)
        a = gelu(z)
    if a.shape[1] != params["cls.weight"].shape[0]:
        raise ShapeError(f"머리 입력 폭이 맞지 않습니다: {a.shape}")
    trace.features = a

    logits = a @ params["cls.weight"] + params["cls.bias"]

    q = a @ params["proj.0.weight"] + params["proj.0.bias"]
    u, trace.norm_cache = layer_norm(q, params["proj.norm.gain"], params["proj.norm.offset"])
    g = gelu(u)
    trace.proj_pre = u
    trace.proj_act = g
    projection = g @ params["proj.1.weight"] + params["proj.1.bias"]

    trace.logits_shape = logits.shape
    trace.projection_shape = projection.shape
    return HeadOutputs(logits, projection), trace


def backward(trace: ForwardTrace, dLogits, dProjection) -> tuple[NetworkParams, np.ndarray]:
    """상류 기울기 dLogits, dProjection에 대한 정확한 역전파.

    Returns:
        (파라미터 기울기 dict, 입력 기울기 dX)
    """
    dLogits = np.asarray(dLogits, dtype=np.float64)
    dProjection = np.asarray(dProjection, dtype=np.float64)
    if dLogits.shape != trace.logits_shape or dProjection.shape != trace.projection_shape:
        raise ShapeError(
            f"trace와 상류 기울기 형상이 다릅니다: {dLogits.shape}/{dProjection.shape} "
            f"vs {trace.logits_shape}/{trace.projection_shape}"
        )
    p = trace.params
    h = trace.features
    grads: NetworkParams = {}

    grads["cls.weight"] = h.T @ dLogits
    grads["cls.bias"] = dLogits.sum(axis=0)
    dh = dLogits @ p["cls.weight"].T

    grads["proj.1.weight"] = trace.proj_act.T @ dProjection
    grads["proj.1.bias"] = dProjection.sum(axis=0)
    du = (dProjection @ p["proj.1.weight"].T) * gelu_grad(trace.proj_pre)
    dq, grads["proj.norm.gain"], grads["proj.norm.offset"] = layer_norm_grad(trace.norm_cache, du)
    grads["proj.0.weight"] = h.T @ dq
    grads["proj.0.bias"] = dq.sum(axis=0)
    dh = dh + dq @ p["proj.0.weight"].T

    for i in reversed(range(len(trace.pre_acts))):
        dz = dh * gelu_grad(trace.pre_acts[i])
        grads[f"trunk.{i}.weight"] = trace.inputs[i].T @ dz
        grads[f"trunk.{i}.bias"] = dz.sum(axis=0)
        dh = dz @ p[f"trunk.{i}.weight"].T

    return {name: grads[name] for name in p}, dh


def ce_label_smoothing(logits, labels, eps: float) -> tuple[float, np.ndarray]:
    """레이블 스무딩 교차엔트로피.

    target = (1 - eps) onehot + eps / C, loss = 배치 평균 -sum target log softmax.

    Returns:
        (loss, dLogits): dLogits = (softmax - target) / n
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    n, C = logits.shape
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"label smoothing eps는 [0, 1) 범위여야 합니다: {eps}")
    if labels.shape != (n,) or np.any(labels < 0) or np.any(labels >= C):
        raise ValueError(f"레이블이 [0, {C}) 범위를 벗어났습니다.")
    target = np.full((n, C), eps / C)
    target[np.arange(n), labels] += 1.0 - eps
    log_p = log_softmax(logits, axis=1)
    loss = float(-np.sum(target * log_p) / n)
    return loss, (np.exp(log_p) - target) / n


def mse_consistency(ys, yt) -> tuple[float, np.ndarray]:
    """학생/교사 확률 출력의 평균제곱오차. 기울기는 학생 쪽으로만 흐른다."""
    ys = np.asarray(ys, dtype=np.float64)
    yt = np.asarray(yt, dtype=np.float64)
    if ys.shape != yt.shape or ys.ndim != 2:
        raise ShapeError(f"ys, yt 형상이 다릅니다: {ys.shape} vs {yt.shape}")
    for name, prob in (("ys", ys), ("yt", yt)):
        if np.any(np.abs(prob.sum(axis=1) - 1.0) > 1e-8):
            raise ValueError(f"{name}의 각 행은 합이 1인 확률이어야 합니다.")
    diff = ys - yt
    return float(np.mean(diff**2)), 2.0 * diff / diff.size


def softmax_vjp(probs: np.ndarray, dprobs: np.ndarray) -> np.ndarray:
    """p = softmax(z) 일 때 dz = p o (dp - <p, dp>)."""
    return probs * (dprobs - np.sum(probs * dprobs, axis=1, keepdims=True))


@dataclass
class OptimState:
    """AdamW 1차/2차 모멘트와 스텝 수."""
    m: NetworkParams
    v: NetworkParams
    step: int = 0


def init_optim_state(params: NetworkParams) -> OptimState:
    return OptimState(
        m={k: np.zeros_like(v) for k, v in params.items()},
        v={k: np.zeros_like(v) for k, v in params.items()},
    )


def adamw_step(
    params: NetworkParams,
    grads: NetworkParams,
    state: OptimState,
    lr: float,
    wd: float,
    b1: float = 0.9,
    b2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[NetworkParams, OptimState]:
    """편향 보정 적응 스텝 + 분리된 가중치 감쇠.

    theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * theta
    """
    if lr < 0.0 or wd < 0.0:
        raise ValueError(f"lr, wd는 0 이상이어야 합니다: lr={lr}, wd={wd}")
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"{name} 기울기에 유한하지 않은 값이 있습니다.")
    step = state.step + 1
    new_params, new_m, new_v = {}, {}, {}
    for name, theta in params.items():
        g = grads[name]
        m = b1 * state.m[name] + (1.0 - b1) * g
        v = b2 * state.v[name] + (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1**step)
        v_hat = v / (1.0 - b2**step)
        new_params[name] = theta - lr * m_hat / (np.sqrt(v_hat) + eps) - lr * wd * theta
        new_m[name] = m
        new_v[name] = v
    return new_params, OptimState(new_m, new_v, step)
