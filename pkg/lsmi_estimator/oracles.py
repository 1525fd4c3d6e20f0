"""참값 및 기준선 의존성 측도.

- 이산 결합분포의 정확한 SMI
- 이변량 가우시안의 SMI/MI 닫힌 형태와 2차원 구적 검증
- KSG k-최근접 이웃 MI 추정기, 가우시안 KDE plug-in MI 추정기
- 유한차분 기울기 (모든 기울기 검사의 기준)
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid
from scipy.spatial import cKDTree
from scipy.special import digamma, logsumexp
from scipy.stats import norm

from errors import (
    DegenerateMarginalError,
    InvalidPmfError,
    NonFiniteError,
    PairingError,
    ShapeError,
)
from .kernels import as_batch, check_bandwidth

PMF_TOLERANCE = 1e-12
KSG_JITTER_SCALE = 1e-10


@dataclass
class MiEstimate:
    """상호정보량 추정값 (단위: nats)."""
    value: float
    method: str


def check_pmf(pmf) -> np.ndarray:
    """결합확률표 검증: 비음수, 합 1 (허용오차 1e-12)."""
    p = np.asarray(pmf, dtype=np.float64)
    if p.ndim != 2 or p.size == 0:
        raise InvalidPmfError(f"결합확률표는 2차원이어야 합니다: shape={p.shape}")
    if not np.all(np.isfinite(p)) or np.any(p < 0.0):
        raise InvalidPmfError("결합확률표에 음수 또는 유한하지 않은 값이 있습니다.")
    if abs(p.sum() - 1.0) > PMF_TOLERANCE:
        raise InvalidPmfError(f"결합확률의 합이 1이 아닙니다: {p.sum()!r}")
    return p


def discrete_smi(pmf) -> float:
    """1/2 sum_{x,y} p(x)p(y) (p(x,y)/(p(x)p(y)) - 1)^2.

    Raises:
        DegenerateMarginalError: 주변확률 중 0이 있을 때
    """
    p = check_pmf(pmf)
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    if np.any(px <= 0.0) or np.any(py <= 0.0):
        raise DegenerateMarginalError("주변확률이 0인 범주가 있습니다.")
    q = np.outer(px, py)
    return float(0.5 * np.sum(q * (p / q - 1.0) ** 2))


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not abs(rho) < 1.0:
        raise ValueError(f"|rho| < 1 이어야 합니다: {rho}")
    return rho


def gaussian_smi(rho: float) -> float:
    """표준 이변량 가우시안의 SMI: rho^2 / (2 (1 - rho^2))."""
    rho = _check_rho(rho)
    return rho**2 / (2.0 * (1.0 - rho**2))


def gaussian_mi(rho: float) -> float:
    """표준 이변량 가우시안의 MI: -1/2 ln(1 - rho^2) nats."""
    rho = _check_rho(rho)
    return -0.5 * math.log1p(-(rho**2))


def _gaussian_grid(rho: float, limit: float, points: int):
    axis = np.linspace(-limit, limit, points)
    x, y = np.meshgrid(axis, axis, indexing="ij")
    one_m = 1.0 - rho**2
    log_joint = (
        -(x**2 - 2.0 * rho * x * y + y**2) / (2.0 * one_m)
        - math.log(2.0 * math.pi) - 0.5 * math.log(one_m)
    )
    log_prod = norm.logpdf(x) + norm.logpdf(y)
    return axis, log_joint, log_prod


def gaussian_smi_quadrature(rho: float, limit: float = 6.0, points: int = 1201) -> float:
    """1/2 (∫ p^2/(p_x p_y) dxdy - 1) 을 균일 격자 사다리꼴 적분으로 계산한다.

    |rho|가 클수록 피적분함수가 대각선 방향으로 넓게 퍼지므로
    rho=0.8 근처에서는 limit을 12 정도로 넓혀야 1e-3 이내가 된다.
    """
    rho = _check_rho(rho)
    axis, log_joint, log_prod = _gaussian_grid(rho, limit, points)
    integrand = np.exp(2.0 * log_joint - log_prod)
    total = trapezoid(trapezoid(integrand, axis, axis=1), axis)
    return 0.5 * (total - 1.0)


def gaussian_mi_quadrature(rho: float, limit: float = 6.0, points: int = 1201) -> float:
    """KL 피적분함수 p ln(p/(p_x p_y)) 의 격자 적분."""
    rho = _check_rho(rho)
    axis, log_joint, log_prod = _gaussian_grid(rho, limit, points)
    integrand = np.exp(log_joint) * (log_joint - log_prod)
    return float(trapezoid(trapezoid(integrand, axis, axis=1), axis))


def _paired_batches(X, Y) -> tuple[np.ndarray, np.ndarray]:
    X = as_batch(X, "X")
    Y = as_batch(Y, "Y")
    if X.shape[0] != Y.shape[0]:
        raise PairingError(f"X와 Y의 샘플 수가 다릅니다: {X.shape[0]} vs {Y.shape[0]}")
    return X, Y


def _jitter(Z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    span = np.ptp(Z, axis=0)
    span = np.where(span > 0.0, span, 1.0)
    return Z + KSG_JITTER_SCALE * span * rng.uniform(-1.0, 1.0, size=Z.shape)


def ksg_mi(X, Y, k: int = 5, seed: int = 0) -> MiEstimate:
    """KSG 추정기 1: psi(k) + psi(n) - <psi(n_x + 1) + psi(n_y + 1)>.

    max-norm 이웃을 쓰며, n_x(i)는 결합공간 k번째 이웃 거리 eps_i보다
    X 공간에서 엄격히 가까운 점의 수(자기 자신 제외)이다.
    k번째 이웃 거리가 0인 중복 샘플이 있으면 데이터 범위의 1e-10 크기
    균일 잡음을 더한 뒤 다시 계산한다 (seed로 결정적).
    """
    X, Y = _paired_batches(X, Y)
    n = X.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"1 <= k < n 이어야 합니다: k={k}, n={n}")

    eps = cKDTree(np.hstack([X, Y])).query(np.hstack([X, Y]), k=k + 1, p=np.inf)[0][:, k]
    if np.any(eps == 0.0):
        rng = np.random.Generator(np.random.Philox(seed))
        X = _jitter(X, rng)
        Y = _jitter(Y, rng)
        joint = np.hstack([X, Y])
        eps = cKDTree(joint).query(joint, k=k + 1, p=np.inf)[0][:, k]

    # query_ball_point는 거리 <= r 을 세므로 r을 eps 바로 아래로 내려 엄격 부등호를 만든다.
    # 반환 개수에는 자기 자신이 포함되어 n_x + 1 이 된다.
    radius = np.nextafter(eps, 0.0)
    nx1 = cKDTree(X).query_ball_point(X, radius, p=np.inf, return_length=True)
    ny1 = cKDTree(Y).query_ball_point(Y, radius, p=np.inf, return_length=True)
    value = digamma(k) + digamma(n) - np.mean(digamma(nx1) + digamma(ny1))
    return MiEstimate(value=float(value), method="ksg")


def silverman_bandwidth(x) -> float:
    """1차원 Silverman 규칙 1.06 * std * n^(-1/5). 퍼짐이 0이면 1.0."""
    x = as_batch(x)[:, 0]
    spread = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    if spread <= 0.0:
        return 1.0
    return 1.06 * spread * x.size ** (-0.2)


def _log_kde_1d(x: np.ndarray, bw: float) -> np.ndarray:
    """재대입 가우시안 KDE의 로그 밀도: 각 행은 한 평가점의 커널 로그값."""
    return norm.logpdf((x[:, None] - x[None, :]) / bw) - math.log(bw)


def kde_mi(X, Y, bw_x, bw_y) -> MiEstimate:
    """가우시안 KDE plug-in 재대입 추정: <ln p(x,y) - ln p(x) - ln p(y)>.

    결합 밀도는 두 폭의 곱 커널을 쓴다. 1차원 주변분포만 지원한다.
    """
    X, Y = _paired_batches(X, Y)
    if X.shape[1] != 1 or Y.shape[1] != 1:
        raise ShapeError("kde_mi는 1차원 X, Y만 지원합니다.")
    bw_x = check_bandwidth(bw_x)
    bw_y = check_bandwidth(bw_y)
    n = X.shape[0]
    log_kx = _log_kde_1d(X[:, 0], bw_x)
    log_ky = _log_kde_1d(Y[:, 0], bw_y)
    log_n = math.log(n)
    log_px = logsumexp(log_kx, axis=1) - log_n
    log_py = logsumexp(log_ky, axis=1) - log_n
    log_pxy = logsumexp(log_kx + log_ky, axis=1) - log_n
    return MiEstimate(value=float(np.mean(log_pxy - log_px - log_py)), method="kde")


def finite_diff_grad(f: Callable[[np.ndarray], float], X0, h: float = 1e-5) -> np.ndarray:
    """중심차분 (f(X0 + h e) - f(X0 - h e)) / 2h 를 좌표마다 계산한다.

    Raises:
        NonFiniteError: f 평가값이 유한하지 않을 때
    """
    if not h > 0.0:
        raise ValueError(f"h는 양수여야 합니다: {h}")
    X0 = np.array(X0, dtype=np.float64)
    grad = np.zeros_like(X0)
    flat = X0.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        f_plus = float(f(X0))
        flat[i] = orig - h
        f_minus = float(f(X0))
        flat[i] = orig
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise NonFiniteError(f"좌표 {i}에서 f가 유한하지 않습니다.")
        out[i] = (f_plus - f_minus) / (2.0 * h)
    return grad


def max_relative_error(analytic, numeric, floor: float = 1e-8) -> float:
    """|a - b| / max(|a|, |b|) 의 최댓값. 두 값 모두 floor 이하인 원소는 제외한다."""
    a = np.asarray(analytic, dtype=np.float64).ravel()
    b = np.asarray(numeric, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"형상 불일치: {a.shape} vs {b.shape}")
    scale = np.maximum(np.abs(a), np.abs(b))
    mask = scale > floor
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(a - b)[mask] / scale[mask]))
