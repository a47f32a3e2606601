"""Run configuration: TOML file loading plus flag overrides."""

from dataclasses import dataclass, field, asdict

from .classify.training import TrainConfig


def _parse_scalar(text):
    text = text.strip()
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return text[1:-1].encode("utf-8").decode("unicode_escape")
    if text.startswith("'") and text.endswith("'") and len(text) >= 2:
        return text[1:-1]
    if text == "true":
        return True
    if text == "false":
        return False
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1].strip()
        if not inner:
            return []
        return [_parse_scalar(part) for part in _split_array(inner)]
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"unsupported TOML value: {text!r}")


def _split_array(inner):
    parts = []
    depth = 0
    quote = None
    current = ""
    for ch in inner:
        if quote:
            current += ch
            if ch == quote:
                quote = None
            continue
        if ch in "\"'":
            quote = ch
            current += ch
        elif ch == "[":
            depth += 1
            current += ch
        elif ch == "]":
            depth -= 1
            current += ch
        elif ch == "," and depth == 0:
            parts.append(current)
            current = ""
        else:
            current += ch
    if current.strip():
        parts.append(current)
    return parts


def loads_toml(text):
    """Parse the TOML subset used by config files: tables, string /
    number / bool / flat-array values, comments.  (The interpreter here
    predates a standard-library TOML parser and the package mirror does
    not carry one, so this covers exactly what config files need.)
    """
    result = {}
    table = result
    for raw_line in text.splitlines():
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            table = result
            for part in name.split("."):
                table = table.setdefault(part, {})
            continue
        if "=" not in line:
            raise ValueError(f"malformed TOML line: {raw_line!r}")
        key, _, value = line.partition("=")
        # strip an inline comment, but not a '#' inside a string
        stripped = value.strip()
        if not stripped.startswith(("'", '"')):
            value = value.split("#", 1)[0]
        table[key.strip()] = _parse_scalar(value)
    return result


def load_toml(path):
    with open(path, encoding="utf-8") as fh:
        return loads_toml(fh.read())


@dataclass
class RunConfig:
    sentences_path: str | None = None
    annotations_path: str | None = None
    gold_path: str | None = None
    models_dir: str = "models"
    out_dir: str = "out"
    encoder_id: str = "tiny-test"
    encoder_ids: list = field(default_factory=list)
    seed: int = 42
    max_workers: int = 1
    llm_model: str = "Meta-Llama-3-8B-Instruct"
    train: TrainConfig = field(default_factory=TrainConfig)

    def to_json(self):
        obj = asdict(self)
        obj["train"] = self.train.to_json()
        return obj


_RUN_KEYS = {
    "sentences_path", "annotations_path", "gold_path", "models_dir",
    "out_dir", "encoder_id", "encoder_ids", "seed", "max_workers",
    "llm_model",
}


def load_run_config(path=None, overrides=None):
    """Build a RunConfig from an optional TOML file plus a dict of
    overrides; override values win over file values."""
    file_values = load_toml(path) if path else {}
    train_values = dict(file_values.pop("train", {}))
    values = {k: v for k, v in file_values.items() if k in _RUN_KEYS}
    unknown = set(file_values) - set(values)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in _RUN_KEYS:
            values[key] = value
        else:
            train_values[key] = value
    train_fields = set(TrainConfig.__dataclass_fields__)
    bad = set(train_values) - train_fields
    if bad:
        raise ValueError(f"unknown train config keys: {sorted(bad)}")
    return RunConfig(train=TrainConfig(**train_values), **values)
