"""CSV ingestion for the extraction inputs and the feature CSV writer."""

import csv
from pathlib import Path

from ..errors import DataError
from .extract import DetectionInput, ExtractResult, PhysioRecord, TongueObservation
from .schema import DETECTION_CLASSES, FeatureSchema

_GENDER_CODES = {"1": 1.0, "0": 0.0, "m": 1.0, "male": 1.0, "f": 0.0, "female": 0.0}

FLAG_NAMES = ("body_valid", "coat_valid", "body_texture_valid", "coat_texture_valid")


def _num(row_no, row, col_of, name, path, optional=False):
    idx = col_of.get(name)
    if idx is None or idx >= len(row) or row[idx].strip() == "":
        if optional:
            return None
        raise DataError(f"{path}: missing value {name!r} at data row {row_no}")
    try:
        return float(row[idx])
    except ValueError:
        raise DataError(
            f"{path}: non-numeric value in column {name!r} at data row {row_no}"
        ) from None


def load_physio_csv(path) -> dict[str, tuple[PhysioRecord, float | None]]:
    """image_id,gender,age,height,weight,waist,hip[,whr,whtr,bmi][,label].

    Gender accepts 0/1 or m/f spellings.  Returns id -> (record, label or
    None when the column is absent).
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    col_of = {h: i for i, h in enumerate(header)}
    for required in ("image_id", "gender", "age", "height", "weight", "waist", "hip"):
        if required not in col_of:
            raise DataError(f"{path}: missing required column {required!r}")
    out = {}
    for row_no, row in enumerate(rows[1:], start=1):
        image_id = row[col_of["image_id"]].strip()
        raw_gender = row[col_of["gender"]].strip().lower()
        if raw_gender not in _GENDER_CODES:
            raise DataError(
                f"{path}: unrecognized gender {raw_gender!r} at data row {row_no}"
            )
        record = PhysioRecord(
            gender=_GENDER_CODES[raw_gender],
            age=_num(row_no, row, col_of, "age", path),
            height=_num(row_no, row, col_of, "height", path),
            weight=_num(row_no, row, col_of, "weight", path),
            waist=_num(row_no, row, col_of, "waist", path),
            hip=_num(row_no, row, col_of, "hip", path),
            whr=_num(row_no, row, col_of, "whr", path, optional=True),
            whtr=_num(row_no, row, col_of, "whtr", path, optional=True),
            bmi=_num(row_no, row, col_of, "bmi", path, optional=True),
        )
        label = None
        if "label" in col_of:
            label = _num(row_no, row, col_of, "label", path)
            if label not in (0.0, 1.0):
                raise DataError(f"{path}: label outside {{0,1}} at data row {row_no}")
        out[image_id] = (record, label)
    return out


def load_detections_csv(path) -> dict[str, list[tuple[str, int, int, int, int]]]:
    """image_id,class,x_min,y_min,x_max,y_max; images may have no rows."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    expected = ["image_id", "class", "x_min", "y_min", "x_max", "y_max"]
    if header[: len(expected)] != expected:
        raise DataError(f"{path}: header must start with {','.join(expected)}")
    out: dict[str, list] = {}
    for row_no, row in enumerate(rows[1:], start=1):
        cls = row[1].strip()
        if cls not in DETECTION_CLASSES:
            raise DataError(f"{path}: unknown detection class {cls!r} at data row {row_no}")
        try:
            box = tuple(int(float(v)) for v in row[2:6])
        except ValueError:
            raise DataError(f"{path}: non-numeric box at data row {row_no}") from None
        out.setdefault(row[0].strip(), []).append((cls, *box))
    return out


def detections_for(obs: TongueObservation, boxes_by_id, image_id: str) -> DetectionInput:
    return DetectionInput.from_boxes(boxes_by_id.get(image_id, []), obs)


def write_feature_csv(path, schema: FeatureSchema, rows: list[tuple[str, ExtractResult]],
                      labels: dict[str, float] | None = None,
                      embeddings: dict[str, list[float]] | None = None,
                      embed_dim: int = 0) -> None:
    """Feature CSV in schema order (plus emb_*/label when available) and a
    sidecar <path>.flags.csv with the per-image validity flags."""
    path = Path(path)
    emb_names = [f"emb_{i}" for i in range(embed_dim)]
    with_labels = labels is not None
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(schema.names) + emb_names + (["label"] if with_labels else []))
        for image_id, result in rows:
            out = [repr(float(v)) for v in result.values]
            if embed_dim:
                out += [repr(float(v)) for v in embeddings[image_id]]
            if with_labels:
                out.append(str(int(labels[image_id])))
            writer.writerow(out)
    flags_path = path.with_suffix(path.suffix + ".flags.csv")
    with open(flags_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", *FLAG_NAMES])
        for image_id, result in rows:
            writer.writerow([image_id] + [int(result.flags[n]) for n in FLAG_NAMES])
