"""벤치마크 스윕 결과를 Jupyter Notebook (.ipynb) 보고서로 만든다.

nbformat으로 셀 요약표(마크다운)와 CSV를 다시 읽는 코드 셀을 구성한다.
"""

from pathlib import Path

import nbformat
from nbformat.v4 import new_code_cell, new_markdown_cell, new_notebook

from lsmi_estimator.benchmark import BenchmarkRow

# 보고서 코드 셀: 스윕 CSV를 읽어 셀별로 묶는다
LOAD_CSV_CODE = """\
import csv
from collections import defaultdict

with open({path!r}, encoding="utf-8") as f:
    rows = list(csv.DictReader(f))

cells = defaultdict(list)
for r in rows:
    if r["kind"] == "run":
        cells[(r["method"], float(r["rho"]), int(r["n"]))].append(float(r["estimate"]))
"""


def _summary_table(rows: list[BenchmarkRow], method: str) -> str:
    means = {(r.rho, r.n): r for r in rows if r.kind == "mean" and r.method == method}
    stds = {(r.rho, r.n): r for r in rows if r.kind == "std" and r.method == method}
    lines = [
        "| rho | n | 참값 | 평균 추정 | 표준편차 | 평균 절대오차 |",
        "|---:|---:|---:|---:|---:|---:|",
    ]
    for key in sorted(means):
        m = means[key]
        s = stds.get(key)
        std = f"{s.estimate:.4f}" if s is not None else ""
        lines.append(f"| {m.rho:g} | {m.n} | {m.truth:.4f} | {m.estimate:.4f} | {std} | {m.error:.4f} |")
    return "\n".join(lines)


def build_benchmark_report(
    rows: list[BenchmarkRow],
    csv_path: str | None = None,
    title: str = "의존성 추정기 벤치마크",
    output_path: str | None = None,
) -> nbformat.NotebookNode:
    """스윕 결과로 보고서 노트북을 만든다.

    구조: 제목 셀 -> (방법별 요약표 마크다운) x M -> CSV 로드 코드 셀

    Args:
        rows: run_sweep 결과 (개별 행 + 요약 행)
        csv_path: 코드 셀에서 읽을 스윕 CSV 경로 (None이면 코드 셀 생략)
        title: 노트북 제목
        output_path: 저장할 파일 경로 (None이면 저장하지 않음)
    """
    nb = new_notebook()
    nb.metadata.kernelspec = {
        "display_name": "Python 3",
        "language": "python",
        "name": "python3",
    }
    nb.metadata.language_info = {"name": "python"}

    nb.cells.append(new_markdown_cell(
        f"# {title}\n\nLSMI는 SMI 참값, KSG/KDE는 MI 참값(nats)과 비교한다."
    ))

    methods = list(dict.fromkeys(r.method for r in rows))
    for method in methods:
        nb.cells.append(new_markdown_cell(f"## {method}\n\n{_summary_table(rows, method)}"))

    if csv_path:
        nb.cells.append(new_code_cell(LOAD_CSV_CODE.format(path=str(csv_path))))

    # 셀 id를 순번으로 고정해 같은 입력이면 같은 파일이 나온다
    for i, cell in enumerate(nb.cells):
        cell.id = f"cell-{i}"

    if output_path:
        path = Path(output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            nbformat.write(nb, f)

    return nb
