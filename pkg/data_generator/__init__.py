"""합성 데이터 생성 및 CSV 입출력 패키지."""

from .synthetic import (
    DatasetSpec,
    LabeledDataset,
    gen_blobs,
    gen_discrete_joint,
    gen_gaussian_pair,
    gen_two_moons,
    make_labeled_dataset,
    make_paired_dataset,
    make_rng,
    split_dataset,
)
from .csv_io import (
    load_labeled_csv,
    load_paired_csv,
    write_benchmark_csv,
    write_labeled_csv,
    write_metrics_csv,
    write_paired_csv,
)
