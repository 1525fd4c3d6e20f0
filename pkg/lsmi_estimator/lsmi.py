"""LSMI (least-squares mutual information) 의존성 추정기.

짝지어진 두 배치 (p_s, p_t)의 가우시안 Gram 행렬 K, L로부터

    H = (1/n^2) (K K^T) o (L L^T)
    h = (1/n) (K o L) 1
    alpha = (H + delta I)^{-1} h
    LSMI = (1/2n) tr(diag(alpha) K L) - 1/2

를 계산한다. 밀도비 모델의 기저 중심은 샘플 자신이다.
폭과 정규화 계수는 고정값, 중앙값 휴리스틱, 또는 격자 교차검증으로 정한다.
기울기는 p_s 쪽으로만 흐르며 p_t는 상수로 취급한다.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigvalsh

from errors import FoldError, NumericError, PairingError, ShapeError
from .kernels import (
    as_batch,
    check_bandwidth,
    gaussian_cross_gram,
    gaussian_gram,
    gram_vjp,
    median_heuristic,
)

logger = logging.getLogger(__name__)

DEFAULT_DELTA = 1e-2
DEFAULT_FOLDS = 2
DEFAULT_SIGMA_SCALES = (0.25, 0.5, 1.0, 2.0)
DEFAULT_DELTA_GRID = (1e-3, 1e-2, 1e-1)
RESIDUAL_TOLERANCE = 1e-8

GRAD_MODES = ("full", "frozen_alpha")


@dataclass(frozen=True)
class BandwidthRule:
    """커널 폭 결정 규칙.

    kind:
        "fixed" : values[0]을 그대로 사용
        "median": 중앙값 휴리스틱
        "grid"  : values 후보 중 교차검증으로 선택.
                  relative=True이면 후보는 중앙값 휴리스틱의 배수이다.
    """
    kind: str
    values: tuple[float, ...] = ()
    relative: bool = False

    def __post_init__(self):
        if self.kind not in ("fixed", "median", "grid"):
            raise ValueError(f"알 수 없는 폭 규칙입니다: {self.kind}")
        if self.kind == "fixed" and len(self.values) != 1:
            raise ValueError("fixed 규칙에는 값이 정확히 하나 필요합니다.")
        if self.kind == "grid" and not self.values:
            raise ValueError("grid 규칙의 후보가 비어 있습니다.")
        for v in self.values:
            check_bandwidth(v)

    @classmethod
    def fixed(cls, sigma: float) -> "BandwidthRule":
        return cls("fixed", (float(sigma),))

    @classmethod
    def median(cls) -> "BandwidthRule":
        return cls("median")

    @classmethod
    def grid(cls, values, relative: bool = False) -> "BandwidthRule":
        return cls("grid", tuple(float(v) for v in values), relative)

    def candidates(self, X) -> tuple[float, ...]:
        """배치 X에 대해 이 규칙이 허용하는 폭 후보."""
        if self.kind == "fixed":
            return self.values
        if self.kind == "median":
            return (median_heuristic(X),)
        if self.relative:
            base = median_heuristic(X)
            return tuple(base * s for s in self.values)
        return self.values


@dataclass(frozen=True)
class LsmiConfig:
    """LSMI 하이퍼파라미터 설정.

    delta는 후보가 하나면 고정값, 여러 개면 교차검증 격자이다.
    """
    sigma_s: BandwidthRule = field(default_factory=BandwidthRule.median)
    sigma_t: BandwidthRule = field(default_factory=BandwidthRule.median)
    delta: tuple[float, ...] = (DEFAULT_DELTA,)
    grad_mode: str = "full"
    folds: int = DEFAULT_FOLDS
    cv_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not self.delta:
            raise ValueError("delta 후보가 비어 있습니다.")
        for d in self.delta:
            if not np.isfinite(d) or d <= 0.0:
                raise ValueError(f"delta는 양수여야 합니다: {d}")
        if self.grad_mode not in GRAD_MODES:
            raise ValueError(f"grad_mode는 {GRAD_MODES} 중 하나여야 합니다: {self.grad_mode}")

    @property
    def needs_cv(self) -> bool:
        return (
            self.sigma_s.kind == "grid"
            or self.sigma_t.kind == "grid"
            or len(self.delta) > 1
        )

    @property
    def is_resolved(self) -> bool:
        return (
            self.sigma_s.kind == "fixed"
            and self.sigma_t.kind == "fixed"
            and len(self.delta) == 1
        )

    def swapped(self) -> "LsmiConfig":
        """p_s와 p_t의 역할을 바꾼 설정."""
        return replace(self, sigma_s=self.sigma_t, sigma_t=self.sigma_s)


@dataclass
class LsmiEstimate:
    """LSMI 추정 결과와 진단값."""
    value: float
    alpha: np.ndarray
    chosen_sigma_s: float
    chosen_sigma_t: float
    chosen_delta: float
    solve_residual: float


def _check_square_pair(K, L) -> tuple[np.ndarray, np.ndarray]:
    K = np.asarray(K, dtype=np.float64)
    L = np.asarray(L, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape != L.shape:
        raise ShapeError(f"K, L은 같은 크기의 정방행렬이어야 합니다: {K.shape} vs {L.shape}")
    return K, L


def _paired(Ps, Pt) -> tuple[np.ndarray, np.ndarray]:
    Ps = as_batch(Ps, "Ps")
    Pt = as_batch(Pt, "Pt")
    if Ps.shape[0] != Pt.shape[0]:
        raise PairingError(f"Ps와 Pt의 샘플 수가 다릅니다: {Ps.shape[0]} vs {Pt.shape[0]}")
    return Ps, Pt


def build_h_matrix(K, L) -> np.ndarray:
    """H = (1/n^2) (K K^T) o (L L^T)."""
    K, L = _check_square_pair(K, L)
    n = K.shape[0]
    return (K @ K.T) * (L @ L.T) / n**2


def build_h_vector(K, L) -> np.ndarray:
    """h_i = (1/n) sum_j K_ij L_ij."""
    K, L = _check_square_pair(K, L)
    return (K * L).sum(axis=1) / K.shape[0]


def solve_alpha(H, h, delta: float) -> np.ndarray:
    """(H + delta I) alpha = h 를 Cholesky 분해로 푼다.

    Raises:
        NumericError: H + delta I가 양정치가 아닐 때. 최소 고유값을 함께 전달한다.
    """
    H = np.asarray(H, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    n = H.shape[0]
    if H.shape != (n, n) or h.shape != (n,):
        raise ShapeError(f"H {H.shape}, h {h.shape} 형상이 맞지 않습니다.")
    if not np.isfinite(delta) or delta <= 0.0:
        raise ValueError(f"delta는 양수여야 합니다: {delta}")
    A = H + delta * np.eye(n)
    try:
        factor = cho_factor(A, lower=True)
    except LinAlgError:
        min_pivot = float(eigvalsh(A, subset_by_index=[0, 0])[0])
        raise NumericError("H + delta I의 Cholesky 분해에 실패했습니다", min_pivot) from None
    return cho_solve(factor, h)


def lsmi_score(K, L, alpha) -> float:
    """(1/2n) sum_i alpha_i (K L)_ii - 1/2.

    K, L이 대칭이므로 (K L)_ii = sum_j K_ij L_ij 이다.
    """
    K, L = _check_square_pair(K, L)
    alpha = np.asarray(alpha, dtype=np.float64)
    n = K.shape[0]
    if alpha.shape != (n,):
        raise ShapeError(f"alpha 길이가 {n}이어야 합니다: {alpha.shape}")
    return float(alpha @ (K * L).sum(axis=1) / (2.0 * n) - 0.5)


def _fit(K, L, delta) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    H = build_h_matrix(K, L)
    h = build_h_vector(K, L)
    alpha = solve_alpha(H, h, delta)
    residual = float(np.max(np.abs(H @ alpha + delta * alpha - h)))
    if residual > RESIDUAL_TOLERANCE:
        logger.warning("LSMI 선형계 잔차가 큽니다: %.3e", residual)
    return H, h, alpha, residual


def _fold_splits(n: int, folds: int, seed: int) -> list[np.ndarray]:
    rng = np.random.Generator(np.random.Philox(seed))
    return np.array_split(rng.permutation(n), folds)


def _holdout_criteria(Ps, Pt, sigma_s, sigma_t, deltas, splits) -> np.ndarray:
    """한 (sigma_s, sigma_t) 쌍에 대해 delta 후보별 평균 held-out 기준값 J."""
    n = Ps.shape[0]
    totals = np.zeros(len(deltas))
    for hold in splits:
        mask = np.ones(n, dtype=bool)
        mask[hold] = False
        K_tr = gaussian_gram(Ps[mask], sigma_s)
        L_tr = gaussian_gram(Pt[mask], sigma_t)
        H = build_h_matrix(K_tr, L_tr)
        h = build_h_vector(K_tr, L_tr)
        # 중심은 학습 fold 샘플, 평가는 held-out 샘플
        K_ho = gaussian_cross_gram(Ps[hold], Ps[mask], sigma_s)
        L_ho = gaussian_cross_gram(Pt[hold], Pt[mask], sigma_t)
        m = len(hold)
        H_ho = (K_ho.T @ K_ho) * (L_ho.T @ L_ho) / m**2
        h_ho = (K_ho * L_ho).mean(axis=0)
        for k, delta in enumerate(deltas):
            alpha = solve_alpha(H, h, delta)
            totals[k] += 0.5 * alpha @ H_ho @ alpha - h_ho @ alpha
    return totals / len(splits)


def cross_validate(
    Ps,
    Pt,
    sigma_grid_s,
    sigma_grid_t,
    delta_grid,
    folds: int = DEFAULT_FOLDS,
    seed: int = 0,
    workers: int = 1,
) -> tuple[float, float, float]:
    """held-out 최소제곱 밀도비 기준으로 (sigma_s, sigma_t, delta)를 고른다.

    J = 1/2 alpha^T H_holdout alpha - h_holdout^T alpha 를 fold 평균으로 최소화하며,
    동률이면 큰 delta, 그다음 큰 sigma를 택한다.

    Args:
        Ps, Pt: 짝지어진 (n, d) 배치
        sigma_grid_s, sigma_grid_t: 폭 후보
        delta_grid: 정규화 계수 후보
        folds: fold 수 (2 이상, n 이하)
        seed: fold 분할 난수 시드
        workers: 폭 쌍을 병렬로 평가할 스레드 수. 결과는 순차 평가와 같다.

    Returns:
        (sigma_s, sigma_t, delta)

    Raises:
        FoldError: folds < 2 이거나 n < folds 일 때
    """
    Ps, Pt = _paired(Ps, Pt)
    n = Ps.shape[0]
    if folds < 2:
        raise FoldError(f"fold 수는 2 이상이어야 합니다: {folds}")
    if n < folds:
        raise FoldError(f"샘플 수({n})가 fold 수({folds})보다 적습니다.")
    sigmas_s = tuple(check_bandwidth(s) for s in sigma_grid_s)
    sigmas_t = tuple(check_bandwidth(s) for s in sigma_grid_t)
    deltas = tuple(float(d) for d in delta_grid)
    if not sigmas_s or not sigmas_t or not deltas:
        raise ValueError("교차검증 격자가 비어 있습니다.")
    if len(sigmas_s) == len(sigmas_t) == len(deltas) == 1:
        return sigmas_s[0], sigmas_t[0], deltas[0]

    splits = _fold_splits(n, folds, seed)
    pairs = list(product(sigmas_s, sigmas_t))

    def evaluate(pair):
        return _holdout_criteria(Ps, Pt, pair[0], pair[1], deltas, splits)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(evaluate, pairs))
    else:
        scores = [evaluate(pair) for pair in pairs]

    candidates = []
    for (s_s, s_t), crit in zip(pairs, scores):
        for delta, j in zip(deltas, crit):
            candidates.append((float(j), -delta, -s_s, -s_t))
    best = min(candidates)
    logger.debug("교차검증 선택: J=%.6g sigma_s=%.6g sigma_t=%.6g delta=%.3g",
                 best[0], -best[2], -best[3], -best[1])
    return -best[2], -best[3], -best[1]


def resolve_hyperparameters(Ps, Pt, cfg: LsmiConfig | None = None) -> LsmiConfig:
    """규칙을 모두 고정값으로 확정한 설정을 반환한다."""
    cfg = cfg or LsmiConfig()
    if cfg.is_resolved:
        return cfg
    Ps, Pt = _paired(Ps, Pt)
    grid_s = cfg.sigma_s.candidates(Ps)
    grid_t = cfg.sigma_t.candidates(Pt)
    if cfg.needs_cv:
        sigma_s, sigma_t, delta = cross_validate(
            Ps, Pt, grid_s, grid_t, cfg.delta,
            folds=cfg.folds, seed=cfg.cv_seed, workers=cfg.workers,
        )
    else:
        sigma_s, sigma_t, delta = grid_s[0], grid_t[0], cfg.delta[0]
    return replace(
        cfg,
        sigma_s=BandwidthRule.fixed(sigma_s),
        sigma_t=BandwidthRule.fixed(sigma_t),
        delta=(delta,),
    )


def lsmi_estimate(Ps, Pt, cfg: LsmiConfig | None = None) -> LsmiEstimate:
    """짝지어진 두 배치의 LSMI 점수를 추정한다.

    Raises:
        PairingError: 샘플 수가 다를 때
        InsufficientSamplesError: n < 2 일 때 (중앙값 휴리스틱)
    """
    Ps, Pt = _paired(Ps, Pt)
    fixed = resolve_hyperparameters(Ps, Pt, cfg)
    sigma_s = fixed.sigma_s.values[0]
    sigma_t = fixed.sigma_t.values[0]
    delta = fixed.delta[0]
    K = gaussian_gram(Ps, sigma_s)
    L = gaussian_gram(Pt, sigma_t)
    _, _, alpha, residual = _fit(K, L, delta)
    return LsmiEstimate(
        value=lsmi_score(K, L, alpha),
        alpha=alpha,
        chosen_sigma_s=sigma_s,
        chosen_sigma_t=sigma_t,
        chosen_delta=delta,
        solve_residual=residual,
    )


def lsmi_gradient(Ps, Pt, cfg: LsmiConfig | None = None) -> tuple[float, np.ndarray]:
    """LSMI 점수와 Ps에 대한 기울기.

    폭과 delta는 먼저 고정한 뒤 상수로 취급한다.
    score = 1/2 h^T alpha - 1/2 이므로, full 모드에서 alpha의 암묵 미분
    d alpha = (H + delta I)^{-1} (dh - dH alpha) 를 대입하면
    d score = alpha^T dh - 1/2 alpha^T dH alpha 가 되어 추가 선형계 풀이가 필요 없다.
    frozen_alpha 모드는 alpha를 상수로 두고 trace 항만 미분한다.

    Returns:
        (score, dPs): dPs는 (n, d)
    """
    Ps, Pt = _paired(Ps, Pt)
    cfg = resolve_hyperparameters(Ps, Pt, cfg)
    sigma_s = cfg.sigma_s.values[0]
    sigma_t = cfg.sigma_t.values[0]
    K = gaussian_gram(Ps, sigma_s)
    L = gaussian_gram(Pt, sigma_t)
    _, _, alpha, _ = _fit(K, L, cfg.delta[0])
    score = lsmi_score(K, L, alpha)
    n = K.shape[0]
    if cfg.grad_mode == "full":
        B = np.outer(alpha, alpha) * (L @ L.T) / n**2
        G = alpha[:, None] * L / n - B @ K
    else:
        G = alpha[:, None] * L / (2.0 * n)
    return score, gram_vjp(Ps, sigma_s, G, K)


def density_ratio(estimate: LsmiEstimate, Ps, Pt, Xq, Yq) -> np.ndarray:
    """적합된 밀도비 r(x, y) = sum_l alpha_l K(x, x_l) L(y, y_l) 를 질의 쌍에서 평가한다."""
    Ps, Pt = _paired(Ps, Pt)
    Xq, Yq = _paired(Xq, Yq)
    Kq = gaussian_cross_gram(Xq, Ps, estimate.chosen_sigma_s)
    Lq = gaussian_cross_gram(Yq, Pt, estimate.chosen_sigma_t)
    return (Kq * Lq) @ estimate.alpha


def gradient_direction_agreement(
    n: int = 32,
    d: int = 3,
    trials: int = 20,
    seed: int = 0,
    cfg: LsmiConfig | None = None,
) -> float:
    """frozen_alpha와 full 기울기의 내적이 양수인 시행 비율 (진단용, 로그만 남긴다)."""
    cfg = cfg or LsmiConfig()
    rng = np.random.Generator(np.random.Philox(seed))
    agree = 0
    for _ in range(trials):
        Ps = rng.standard_normal((n, d))
        Pt = Ps + 0.5 * rng.standard_normal((n, d))
        fixed = resolve_hyperparameters(Ps, Pt, cfg)
        _, g_full = lsmi_gradient(Ps, Pt, replace(fixed, grad_mode="full"))
        _, g_frozen = lsmi_gradient(Ps, Pt, replace(fixed, grad_mode="frozen_alpha"))
        agree += float(np.sum(g_full * g_frozen)) > 0.0
    ratio = agree / trials
    logger.info("frozen_alpha/full 기울기 방향 일치율: %.2f (n=%d, %d회)", ratio, n, trials)
    return ratio
