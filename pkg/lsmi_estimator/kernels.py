"""가우시안 커널 Gram 행렬과 관련 연산.

LSMI 추정에 쓰이는 쌍별 거리, Gram 행렬, 중앙값 휴리스틱 폭,
그리고 Gram 행렬을 통한 역전파(vector-Jacobian product)를 제공한다.
모든 함수는 입력만으로 결과가 정해지는 순수 함수이며 float64로 계산한다.
"""

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from errors import (
    InsufficientSamplesError,
    InvalidBandwidthError,
    NonFiniteError,
    ShapeError,
)

# 모든 쌍의 거리가 0일 때 사용하는 폭
FALLBACK_SIGMA = 1.0


def as_batch(X, name: str = "X") -> np.ndarray:
    """입력을 (n, d) float64 샘플 배치로 변환하고 검증한다.

    1차원 입력은 (n, 1) 열벡터로 취급한다.
    """
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name}는 (n, d) 행렬이어야 합니다: shape={arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name}에 유한하지 않은 값이 있습니다.")
    return arr


def check_bandwidth(sigma) -> float:
    """폭이 양의 유한한 실수인지 확인한다."""
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma <= 0.0:
        raise InvalidBandwidthError(f"커널 폭은 양의 유한한 값이어야 합니다: {sigma}")
    return sigma


def pairwise_sq_dists(X) -> np.ndarray:
    """쌍별 제곱 유클리드 거리 행렬 (대칭, 대각 0)."""
    X = as_batch(X)
    if X.shape[0] == 1:
        return np.zeros((1, 1))
    # pdist는 차이 벡터를 직접 계산하므로 |x|^2 전개식보다 정확하다
    return squareform(pdist(X, "sqeuclidean"))


def cross_sq_dists(X, C) -> np.ndarray:
    """평가 샘플 X와 기저 중심 C 사이의 제곱 거리 (m, b)."""
    X = as_batch(X)
    C = as_batch(C, "C")
    if X.shape[1] != C.shape[1]:
        raise ShapeError(f"차원 불일치: {X.shape[1]} vs {C.shape[1]}")
    return cdist(X, C, "sqeuclidean")


def gaussian_gram(X, sigma) -> np.ndarray:
    """K_ij = exp(-|x_i - x_j|^2 / (2 sigma^2)).

    Args:
        X: (n, d) 샘플 배치
        sigma: 커널 폭

    Returns:
        (n, n) Gram 행렬. 대각은 정확히 1이다.
    """
    sigma = check_bandwidth(sigma)
    return np.exp(-pairwise_sq_dists(X) / (2.0 * sigma**2))


def gaussian_cross_gram(X, C, sigma) -> np.ndarray:
    """X의 각 샘플과 중심 C 사이의 가우시안 커널 값 (m, b)."""
    sigma = check_bandwidth(sigma)
    return np.exp(-cross_sq_dists(X, C) / (2.0 * sigma**2))


def median_heuristic(X) -> float:
    """쌍별 유클리드 거리의 중앙값을 커널 폭으로 사용한다.

    중앙값이 0이면(절반 이상이 중복 샘플) 양의 거리만으로 중앙값을 다시 구하고,
    모든 거리가 0이면 FALLBACK_SIGMA를 반환한다.

    Raises:
        InsufficientSamplesError: 샘플이 2개 미만일 때
    """
    X = as_batch(X)
    if X.shape[0] < 2:
        raise InsufficientSamplesError("중앙값 휴리스틱에는 샘플이 2개 이상 필요합니다.")
    dists = pdist(X, "euclidean")
    sigma = float(np.median(dists))
    if sigma > 0.0:
        return sigma
    positive = dists[dists > 0.0]
    if positive.size == 0:
        return FALLBACK_SIGMA
    return float(np.median(positive))


def gram_vjp(X, sigma, G, K=None) -> np.ndarray:
    """sum_ij G_ij * dK_ij/dX 를 계산한다 (sigma는 상수 취급).

    r번째 행 = sum_j (G_rj + G_jr) K_rj (x_j - x_r) / sigma^2

    Args:
        X: (n, d) 샘플 배치
        sigma: 커널 폭
        G: (n, n) 상류 기울기
        K: 이미 계산된 gaussian_gram(X, sigma). 없으면 새로 계산한다.

    Returns:
        (n, d) 기울기. 커널이 차이에만 의존하므로 열 합은 0이다.
    """
    X = as_batch(X)
    sigma = check_bandwidth(sigma)
    n = X.shape[0]
    G = np.asarray(G, dtype=np.float64)
    if G.shape != (n, n):
        raise ShapeError(f"G 형상이 ({n}, {n})이어야 합니다: {G.shape}")
    if not np.all(np.isfinite(G)):
        raise NonFiniteError("G에 유한하지 않은 값이 있습니다.")
    if K is None:
        K = gaussian_gram(X, sigma)
    S = (G + G.T) * K
    return (S @ X - S.sum(axis=1)[:, None] * X) / sigma**2
