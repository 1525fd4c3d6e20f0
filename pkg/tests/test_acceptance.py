"""데스크 규모 수용 실험. 시간이 오래 걸리므로 slow 마커로 분리한다 (pytest -m slow)."""

import logging

import numpy as np
import pytest

from data_generator import DatasetSpec, gen_discrete_joint, gen_gaussian_pair, make_labeled_dataset
from drn_trainer.trainer import TrainConfig, train
from lsmi_estimator.lsmi import BandwidthRule, LsmiConfig, lsmi_estimate
from lsmi_estimator.oracles import discrete_smi, gaussian_mi, kde_mi, ksg_mi, silverman_bandwidth

pytestmark = pytest.mark.slow
logger = logging.getLogger(__name__)

SEEDS = range(10)
CV_CONFIG = LsmiConfig(
    sigma_s=BandwidthRule.grid((0.5, 1.0, 2.0), relative=True),
    sigma_t=BandwidthRule.grid((0.5, 1.0, 2.0), relative=True),
    delta=(1e-2, 1e-1),
)
DEPENDENT_PMF = np.array([
    [0.20, 0.05, 0.05],
    [0.05, 0.20, 0.05],
    [0.05, 0.05, 0.30],
])


@pytest.mark.parametrize("rho, low, high", [(0.5, 0.10, 0.24), (0.8, 0.62, 1.15)])
def test_gaussian_smi_recovery(rho, low, high):
    values = [lsmi_estimate(*gen_gaussian_pair(2000, rho, s), CV_CONFIG).value for s in SEEDS]
    assert low <= np.mean(values) <= high


def test_gaussian_independence():
    values = [lsmi_estimate(*gen_gaussian_pair(2000, 0.0, s), CV_CONFIG).value for s in SEEDS]
    assert np.mean(np.abs(values)) <= 0.05


def test_discrete_oracle_agreement():
    # one-hot 사이 제곱거리는 0 또는 2이므로 폭 0.3이면 다른 범주의 커널 값은 1e-5 수준이다
    cfg = LsmiConfig(BandwidthRule.fixed(0.3), BandwidthRule.fixed(0.3), (1e-3,))
    truth = discrete_smi(DEPENDENT_PMF)
    errors = [
        abs(lsmi_estimate(*gen_discrete_joint(DEPENDENT_PMF, 3000, s), cfg).value - truth) / truth
        for s in SEEDS
    ]
    assert np.mean(errors) <= 0.25


def test_ksg_recovers_gaussian_mi():
    values = [ksg_mi(*gen_gaussian_pair(2000, 0.8, s), k=5).value for s in SEEDS]
    assert np.mean(values) == pytest.approx(gaussian_mi(0.8), abs=0.05)


def _kde_value(X, Y) -> float:
    return kde_mi(X, Y, silverman_bandwidth(X), silverman_bandwidth(Y)).value


def test_kde_recovers_gaussian_mi():
    values = [_kde_value(*gen_gaussian_pair(2000, 0.8, s)) for s in SEEDS]
    assert np.mean(values) == pytest.approx(gaussian_mi(0.8), abs=0.12)


@pytest.mark.parametrize("name", ["ksg", "kde"])
def test_baselines_increase_with_rho(name):
    estimate = {"ksg": lambda X, Y: ksg_mi(X, Y).value, "kde": _kde_value}[name]
    means = [np.mean([estimate(*gen_gaussian_pair(2000, rho, s)) for s in SEEDS]) for rho in (0.0, 0.3, 0.6, 0.9)]
    assert all(a < b for a, b in zip(means, means[1:]))


def test_baselines_near_zero_under_independence():
    ksg = [ksg_mi(*gen_gaussian_pair(2000, 0.0, s)).value for s in range(5)]
    kde = []
    for s in range(5):
        X, Y = gen_gaussian_pair(1000, 0.0, s)
        kde.append(kde_mi(X, Y, silverman_bandwidth(X), silverman_bandwidth(Y)).value)
    assert abs(np.mean(ksg)) <= 0.02
    assert abs(np.mean(kde)) <= 0.05


def _best_f1(cfg: TrainConfig) -> float:
    params = {"noise": 0.3}
    train_set = make_labeled_dataset(DatasetSpec("two_moons", 400, cfg.seed, params))
    val_set = make_labeled_dataset(DatasetSpec("two_moons", 400, cfg.seed + 1_000_003, params))
    best, history = train(cfg, train_set, val_set)
    return history[best.epoch].val_macro_f1


def test_dependence_term_does_not_hurt_two_moons():
    seeds = range(5)
    scores = {
        "DRN-MSE-LSMI": [_best_f1(TrainConfig(seed=s, lsmi_cfg=CV_CONFIG)) for s in seeds],
        "DRN-MSE-KL": [_best_f1(TrainConfig(seed=s, dep_measure="kl")) for s in seeds],
        "DRN-MSE-JSD": [_best_f1(TrainConfig(seed=s, dep_measure="jsd")) for s in seeds],
        "CE-only": [_best_f1(TrainConfig(seed=s, dep_measure="none", lambda_max=0.0)) for s in seeds],
    }
    means = {name: float(np.mean(values)) for name, values in scores.items()}
    # 변형 간 순서는 기록만 한다
    ranking = sorted(means, key=means.get, reverse=True)
    logger.info("two_moons 검증 macro F1 평균 순서: %s", " > ".join(f"{k}={means[k]:.4f}" for k in ranking))
    assert means["DRN-MSE-LSMI"] >= means["CE-only"]
