"""CSV 입출력.

고정된 헤더 계약을 따른다.
  - 짝 샘플: s_0,...,s_{d-1},t_0,...,t_{d-1}
  - 레이블 샘플: x_0,...,x_{d-1},label
실수는 17 유효숫자로 기록하여 읽고 쓰기를 반복해도 비트 단위로 같다.
"""

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from errors import DataFormatError
from lsmi_estimator.kernels import as_batch
from .synthetic import LabeledDataset


def format_float(value) -> str:
    """재현 가능한 17 유효숫자 표기. None은 빈 칸."""
    if value is None:
        return ""
    return format(float(value), ".17g")


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"파일을 찾을 수 없습니다: {path}")
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise DataFormatError(str(path), 0, "빈 파일입니다.")
    return rows[0], rows[1:]


def _parse_float(cell: str, path, row: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataFormatError(str(path), row, f"열 {column}의 값이 숫자가 아닙니다: {cell!r}") from None
    if not math.isfinite(value):
        raise DataFormatError(str(path), row, f"열 {column}의 값이 유한하지 않습니다: {cell!r}")
    return value


def _check_width(cells: list[str], width: int, path, row: int) -> None:
    if len(cells) != width:
        raise DataFormatError(str(path), row, f"열 개수가 {width}이어야 합니다: {len(cells)}")


def load_paired_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """짝 샘플 CSV를 (Ps, Pt)로 읽는다.

    Raises:
        FileNotFoundError: 파일이 없을 때
        DataFormatError: 헤더 불일치, 숫자가 아닌 칸, 열 개수 불일치 (행 번호 포함)
    """
    header, body = _read_rows(path)
    if len(header) < 2 or len(header) % 2:
        raise DataFormatError(str(path), 0, f"s_*, t_* 열이 같은 수만큼 필요합니다: {header}")
    d = len(header) // 2
    expected = [f"s_{i}" for i in range(d)] + [f"t_{i}" for i in range(d)]
    if header != expected:
        raise DataFormatError(str(path), 0, f"헤더가 {expected}이어야 합니다: {header}")
    if not body:
        raise DataFormatError(str(path), 0, "데이터 행이 없습니다.")
    values = np.empty((len(body), 2 * d))
    for row, cells in enumerate(body, start=1):
        _check_width(cells, 2 * d, path, row)
        for j, cell in enumerate(cells):
            values[row - 1, j] = _parse_float(cell, path, row, header[j])
    return values[:, :d], values[:, d:]


def load_labeled_csv(path) -> LabeledDataset:
    """레이블 CSV를 읽는다. 클래스 수는 최대 레이블 + 1 (최소 2)로 정한다."""
    header, body = _read_rows(path)
    d = len(header) - 1
    expected = [f"x_{i}" for i in range(d)] + ["label"]
    if d < 1 or header != expected:
        raise DataFormatError(str(path), 0, f"헤더가 x_0,...,x_{{d-1}},label 형식이어야 합니다: {header}")
    if not body:
        raise DataFormatError(str(path), 0, "데이터 행이 없습니다.")
    features = np.empty((len(body), d))
    labels = np.empty(len(body), dtype=np.int64)
    for row, cells in enumerate(body, start=1):
        _check_width(cells, d + 1, path, row)
        for j in range(d):
            features[row - 1, j] = _parse_float(cells[j], path, row, header[j])
        try:
            labels[row - 1] = int(cells[d])
        except ValueError:
            raise DataFormatError(str(path), row, f"label이 정수가 아닙니다: {cells[d]!r}") from None
        if labels[row - 1] < 0:
            raise DataFormatError(str(path), row, f"label은 0 이상이어야 합니다: {cells[d]}")
    return LabeledDataset(features, labels, n_classes=max(2, int(labels.max()) + 1))


def _write(path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_paired_csv(path, Ps, Pt) -> None:
    Ps = as_batch(Ps, "Ps")
    Pt = as_batch(Pt, "Pt")
    d = Ps.shape[1]
    header = [f"s_{i}" for i in range(d)] + [f"t_{i}" for i in range(d)]
    _write(path, header, ([format_float(v) for v in np.concatenate([s, t])] for s, t in zip(Ps, Pt)))


def write_labeled_csv(path, dataset: LabeledDataset) -> None:
    d = dataset.features.shape[1]
    header = [f"x_{i}" for i in range(d)] + ["label"]
    rows = (
        [format_float(v) for v in x] + [str(int(y))]
        for x, y in zip(dataset.features, dataset.labels)
    )
    _write(path, header, rows)


METRICS_COLUMNS = (
    "epoch", "lr", "wd", "lambda_eff", "beta_eff", "ce", "cons", "dep", "total",
    "train_acc", "val_acc", "val_macro_f1",
)


def write_metrics_csv(path, history) -> None:
    """에폭별 학습 기록(EpochRecord 목록)을 기록한다."""
    rows = (
        [str(rec.epoch)] + [format_float(getattr(rec, col)) for col in METRICS_COLUMNS[1:]]
        for rec in history
    )
    _write(path, METRICS_COLUMNS, rows)


BENCHMARK_COLUMNS = ("kind", "method", "rho", "n", "seed", "estimate", "truth", "error", "wall_time")


def write_benchmark_csv(path, rows) -> None:
    """벤치마크 행(BenchmarkRow 목록)을 기록한다. wall_time이 None이면 빈 칸."""
    out = (
        [
            r.kind, r.method, format_float(r.rho), str(r.n), str(r.seed),
            format_float(r.estimate), format_float(r.truth), format_float(r.error),
            format_float(r.wall_time),
        ]
        for r in rows
    )
    _write(path, BENCHMARK_COLUMNS, out)
