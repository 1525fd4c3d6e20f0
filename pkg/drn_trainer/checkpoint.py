"""파라미터 체크포인트 파일 (텍스트 형식).

    DEPMAX1
    <텐서 개수>
    <이름> <차원 수> <크기...>
    <17 유효숫자 값들, 공백 구분>
    ...
"""

from pathlib import Path

import numpy as np

from errors import DataFormatError

MAGIC = "DEPMAX1"


def save_checkpoint(path, tensors: dict[str, np.ndarray]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [MAGIC, str(len(tensors))]
    for name, value in tensors.items():
        if any(c.isspace() for c in name):
            raise ValueError(f"텐서 이름에 공백을 쓸 수 없습니다: {name!r}")
        value = np.asarray(value, dtype=np.float64)
        lines.append(" ".join([name, str(value.ndim), *map(str, value.shape)]))
        lines.append(" ".join(format(v, ".17g") for v in value.ravel()))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_checkpoint(path) -> dict[str, np.ndarray]:
    """체크포인트를 읽는다.

    Raises:
        FileNotFoundError: 파일이 없을 때
        DataFormatError: 매직 헤더나 텐서 형식이 잘못되었을 때
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"파일을 찾을 수 없습니다: {path}")
    lines = path.read_text(encoding="utf-8").split("\n")
    if not lines or lines[0] != MAGIC:
        raise DataFormatError(str(path), 0, f"매직 헤더 {MAGIC}가 아닙니다.")
    try:
        count = int(lines[1])
        tensors = {}
        for k in range(count):
            head = lines[2 + 2 * k].split()
            name, ndim = head[0], int(head[1])
            shape = tuple(int(s) for s in head[2:2 + ndim])
            body = lines[3 + 2 * k].split()
            values = np.array([float(v) for v in body], dtype=np.float64)
            tensors[name] = values.reshape(shape)
    except (IndexError, ValueError) as e:
        raise DataFormatError(str(path), 0, f"텐서 형식 오류: {e}") from None
    return tensors
