"""추정기 비교 스윕.

(method, rho, n, seed) 셀마다 가우시안 쌍을 생성해 추정하고,
LSMI는 SMI 참값, KSG/KDE는 MI 참값과 비교한다.
셀은 서로 독립이라 병렬로 돌려도 되며, 결과 행은 항상 같은 순서로 정렬된다.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np
from tqdm import tqdm

from data_generator.synthetic import DatasetSpec, make_paired_dataset
from .lsmi import LsmiConfig, lsmi_estimate
from .oracles import gaussian_mi, gaussian_smi, kde_mi, ksg_mi, silverman_bandwidth

BENCHMARK_METHODS = ("lsmi", "ksg", "kde")


@dataclass
class BenchmarkRow:
    """벤치마크 결과 한 행.

    kind가 "run"이면 개별 실행, "mean"/"std"이면 셀 요약이다.
    mean 행의 error는 |오차|의 평균, std 행은 추정값과 오차의 표준편차를 담는다.
    """
    kind: str
    method: str
    rho: float
    n: int
    seed: int | str
    estimate: float
    truth: float
    error: float
    wall_time: float | None = None


def truth_for(method: str, rho: float) -> float:
    """LSMI는 SMI, 나머지는 MI 참값."""
    return gaussian_smi(rho) if method == "lsmi" else gaussian_mi(rho)


def estimate_cell(
    method: str,
    rho: float,
    n: int,
    seed: int,
    lsmi_cfg: LsmiConfig | None = None,
    ksg_k: int = 5,
) -> float:
    X, Y = make_paired_dataset(DatasetSpec("gaussian_pair", n, seed, {"rho": rho}))
    if method == "lsmi":
        return lsmi_estimate(X, Y, lsmi_cfg).value
    if method == "ksg":
        return ksg_mi(X, Y, ksg_k, seed=seed).value
    if method == "kde":
        return kde_mi(X, Y, silverman_bandwidth(X), silverman_bandwidth(Y)).value
    raise ValueError(f"알 수 없는 방법입니다: {method}")


def run_sweep(
    methods,
    rhos,
    ns,
    seeds: int,
    lsmi_cfg: LsmiConfig | None = None,
    ksg_k: int = 5,
    workers: int = 1,
    timing: bool = False,
    quiet: bool = False,
) -> list[BenchmarkRow]:
    """전체 격자를 실행하고 개별 행 + 셀 요약 행을 반환한다.

    Args:
        methods: BENCHMARK_METHODS의 부분집합
        rhos, ns: 상관계수와 표본 크기 격자
        seeds: 셀마다 0..seeds-1 시드로 반복
        timing: True이면 wall_time을 채운다 (출력이 실행마다 달라진다)
    """
    for method in methods:
        if method not in BENCHMARK_METHODS:
            raise ValueError(f"알 수 없는 방법입니다: {method}")
    if seeds < 1:
        raise ValueError(f"seeds는 1 이상이어야 합니다: {seeds}")
    cells = list(product(methods, rhos, ns, range(seeds)))

    def run(cell):
        method, rho, n, seed = cell
        start = time.perf_counter()
        value = estimate_cell(method, rho, n, seed, lsmi_cfg, ksg_k)
        elapsed = time.perf_counter() - start
        truth = truth_for(method, rho)
        return BenchmarkRow(
            "run", method, float(rho), int(n), seed, value, truth, value - truth,
            elapsed if timing else None,
        )

    progress = tqdm(total=len(cells), desc="benchmark", disable=quiet)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = []
            for row in pool.map(run, cells):
                runs.append(row)
                progress.update()
    else:
        runs = []
        for cell in cells:
            runs.append(run(cell))
            progress.update()
    progress.close()

    order = {m: i for i, m in enumerate(BENCHMARK_METHODS)}
    runs.sort(key=lambda r: (order[r.method], r.rho, r.n, r.seed))
    return runs + summarize(runs)


def summarize(runs: list[BenchmarkRow]) -> list[BenchmarkRow]:
    """(method, rho, n) 셀마다 mean/std 요약 행을 만든다."""
    groups: dict[tuple, list[BenchmarkRow]] = {}
    for r in runs:
        groups.setdefault((r.method, r.rho, r.n), []).append(r)
    summary = []
    for (method, rho, n), rows in groups.items():
        est = np.array([r.estimate for r in rows])
        err = np.array([r.error for r in rows])
        ddof = 1 if len(rows) > 1 else 0
        truth = rows[0].truth
        summary.append(BenchmarkRow("mean", method, rho, n, "mean", float(est.mean()), truth,
                                    float(np.abs(err).mean())))
        summary.append(BenchmarkRow("std", method, rho, n, "std", float(est.std(ddof=ddof)), truth,
                                    float(err.std(ddof=ddof))))
    return summary
