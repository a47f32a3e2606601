"""The three fine-tuning procedures (binary, multi-label, multi-task),
context-window input construction and corpus-scale inference."""

import copy
import json
import math
import random
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import torch
from torch import nn

from ..categories import CATEGORIES, Category
from ..errors import DegenerateStratum, NonFiniteLoss
from .heads import ClassifierHead, init_head
from .encoder import EncoderModel


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 2e-5
    weight_decay: float = 0.01
    epochs: int = 3
    batch_size: int = 10
    threshold: float = 0.5
    seed: int = 42
    head_init_scale: float = 0.02
    adapter_bottleneck: int = 64
    multitask_order: str = "joint"  # "joint" | "sequential"

    def to_json(self):
        return asdict(self)

    @classmethod
    def from_json(cls, obj):
        return cls(**obj)


@dataclass
class FineTunedModel:
    encoder: EncoderModel
    approach: str  # "binary" | "multilabel" | "multitask"
    config: TrainConfig
    head: ClassifierHead | None = None  # binary / multilabel
    adapters: dict = field(default_factory=dict)  # multitask: Category -> module
    category: Category | None = None  # binary only
    epoch_losses: list = field(default_factory=list)

    def predict_probs(self, texts, batch_size=32):
        """Probabilities per category; shape (n, out_dim)."""
        embeddings = self.encoder.encode(list(texts), batch_size=batch_size)
        if self.approach in ("binary", "multilabel"):
            from .heads import head_forward

            return np.atleast_2d(head_forward(self.head, embeddings))
        cols = []
        h = torch.from_numpy(embeddings).float()
        with torch.no_grad():
            for cat in CATEGORIES:
                adapter, head_mod = self.adapters[cat]
                adapter.eval()
                head_mod.eval()
                logits = head_mod(adapter(h) + h)
                cols.append(torch.sigmoid(logits).numpy()[:, 0])
        return np.stack(cols, axis=1)

    def categories(self):
        if self.approach == "binary":
            return [self.category]
        return list(CATEGORIES)


def _set_all_seeds(seed):
    torch.manual_seed(seed)
    np.random.seed(seed % (2 ** 32))
    random.seed(seed)


def _torch_head(head):
    linear = nn.Linear(head.hidden_dim, head.out_dim)
    with torch.no_grad():
        linear.weight.copy_(torch.from_numpy(head.W).float())
        linear.bias.copy_(torch.from_numpy(head.b).float())
    return linear


def _extract_head(linear, variant):
    return ClassifierHead(
        W=linear.weight.detach().numpy().astype(np.float64),
        b=linear.bias.detach().numpy().astype(np.float64),
        variant=variant,
    )


def _epoch_batches(n, batch_size, rng):
    order = list(range(n))
    rng.shuffle(order)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def _check_finite(loss):
    value = float(loss.detach()) if torch.is_tensor(loss) else float(loss)
    if not math.isfinite(value):
        raise NonFiniteLoss(f"loss became {value}")


def _fine_tune(texts, targets, encoder, config, out_dim):
    """Joint encoder + head optimization; returns (encoder copy, head,
    epoch losses).  The caller's encoder is left untouched so one loaded
    encoder can seed any number of runs."""
    encoder = copy.deepcopy(encoder)
    _set_all_seeds(config.seed)
    head_np = init_head(encoder.hidden_dim, out_dim, seed=config.seed,
                        scale=config.head_init_scale)
    head = _torch_head(head_np)
    encoder.module.train()
    params = list(encoder.module.parameters()) + list(head.parameters())
    optimizer = torch.optim.AdamW(
        params, lr=config.learning_rate, weight_decay=config.weight_decay
    )
    loss_fn = nn.BCEWithLogitsLoss()
    y = torch.tensor(targets, dtype=torch.float32).reshape(len(texts), out_dim)
    rng = random.Random(config.seed)
    epoch_losses = []
    for _ in range(config.epochs):
        total = 0.0
        count = 0
        for batch in _epoch_batches(len(texts), config.batch_size, rng):
            input_ids, mask = encoder.tokenizer.batch([texts[i] for i in batch])
            hidden = encoder.module(input_ids, mask)
            logits = head(hidden[:, 0, :])
            loss = loss_fn(logits, y[batch])
            _check_finite(loss)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += float(loss.detach()) * len(batch)
            count += len(batch)
        epoch_losses.append(total / count)
    encoder.module.eval()
    variant = "binary" if out_dim == 1 else "multilabel"
    return encoder, _extract_head(head, variant), epoch_losses


def train_binary(golds, category, encoder, config, sentences_by_id):
    """One fine-tuned encoder plus a fresh single-output head."""
    texts = [sentences_by_id[g.sentence_id].text for g in golds]
    targets = [float(g.labels[category]) for g in golds]
    if len(set(targets)) < 2:
        raise DegenerateStratum(
            f"category {category.value}: training labels are one-class"
        )
    tuned, head, losses = _fine_tune(texts, targets, encoder, config,
                                     out_dim=1)
    return FineTunedModel(
        encoder=tuned,
        approach="binary",
        config=config,
        head=head,
        category=category,
        epoch_losses=losses,
    )


def train_multilabel(golds, encoder, config, sentences_by_id):
    """One fine-tuned encoder plus a fresh 12-output head."""
    texts = [sentences_by_id[g.sentence_id].text for g in golds]
    targets = [
        [float(g.labels[cat]) for cat in CATEGORIES] for g in golds
    ]
    if not any(any(row) for row in targets):
        raise DegenerateStratum("no positive label for any category")
    tuned, head, losses = _fine_tune(texts, targets, encoder, config,
                                     out_dim=len(CATEGORIES))
    return FineTunedModel(
        encoder=tuned,
        approach="multilabel",
        config=config,
        head=head,
        epoch_losses=losses,
    )


class _Adapter(nn.Module):
    """Bottleneck on the pooled embedding; used with a residual connection."""

    def __init__(self, hidden_dim, bottleneck):
        super().__init__()
        self.down = nn.Linear(hidden_dim, bottleneck)
        self.up = nn.Linear(bottleneck, hidden_dim)
        self.act = nn.ReLU()
        # zero-init up projection: the adapter starts as the identity
        # around its residual connection
        with torch.no_grad():
            self.up.weight.zero_()
            self.up.bias.zero_()

    def forward(self, h):
        return self.up(self.act(self.down(h)))


def train_multitask(golds, encoder, config, sentences_by_id):
    """Frozen shared encoder; per-category adapter + binary head.

    The shared forward pass is computed once; encoder parameters are
    never part of the optimizer.
    """
    texts = [sentences_by_id[g.sentence_id].text for g in golds]
    _set_all_seeds(config.seed)
    embeddings = torch.from_numpy(encoder.encode(texts)).float()
    heads = {}
    modules = {}
    for idx, cat in enumerate(CATEGORIES):
        torch.manual_seed(config.seed + idx)
        adapter = _Adapter(encoder.hidden_dim, config.adapter_bottleneck)
        head = _torch_head(init_head(encoder.hidden_dim, 1,
                                     seed=config.seed + idx,
                                     scale=config.head_init_scale))
        modules[cat] = (adapter, head)
    targets = {
        cat: torch.tensor(
            [[float(g.labels[cat])] for g in golds], dtype=torch.float32
        )
        for cat in CATEGORIES
    }
    loss_fn = nn.BCEWithLogitsLoss()
    epoch_losses = []
    if config.multitask_order == "sequential":
        order = [[cat] for cat in CATEGORIES]
    else:
        order = [list(CATEGORIES)]
    per_epoch_totals = [0.0] * config.epochs
    per_epoch_counts = [0] * config.epochs
    for group in order:
        params = []
        for cat in group:
            adapter, head = modules[cat]
            params += list(adapter.parameters()) + list(head.parameters())
        optimizer = torch.optim.AdamW(
            params, lr=config.learning_rate, weight_decay=config.weight_decay
        )
        rng = random.Random(config.seed)
        for epoch in range(config.epochs):
            for batch in _epoch_batches(len(texts), config.batch_size, rng):
                h = embeddings[batch]
                loss = 0.0
                for cat in group:
                    adapter, head = modules[cat]
                    logits = head(adapter(h) + h)
                    loss = loss + loss_fn(logits, targets[cat][batch])
                loss = loss / len(group)
                _check_finite(loss)
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                per_epoch_totals[epoch] += float(loss.detach()) * len(batch)
                per_epoch_counts[epoch] += len(batch)
    epoch_losses = [
        t / c for t, c in zip(per_epoch_totals, per_epoch_counts)
    ]
    for cat, (adapter, head) in modules.items():
        adapter.eval()
        head.eval()
        heads[cat] = modules[cat]
    return FineTunedModel(
        encoder=encoder,
        approach="multitask",
        config=config,
        adapters=heads,
        epoch_losses=epoch_losses,
    )


def build_context_input(sentences_of_review, i, window=1, separator=" "):
    """Target sentence joined with up to `window` neighbors on each side."""
    if not 0 <= i < len(sentences_of_review):
        raise IndexError(i)
    lo = max(0, i - window)
    hi = min(len(sentences_of_review), i + window + 1)
    return separator.join(s.text for s in sentences_of_review[lo:hi])


def classify_corpus(models, sentences, batch_size=32, threshold=None):
    """Predictions for every sentence: {sentence_id: {Category: {prob, label}}}.

    `models` is either a mapping Category -> binary FineTunedModel or a
    single multi-label/multi-task FineTunedModel.
    """
    sentences = list(sentences)
    out = {s.sentence_id: {} for s in sentences}
    if not sentences:
        return out
    texts = [s.text for s in sentences]
    if isinstance(models, FineTunedModel):
        thr = threshold if threshold is not None else models.config.threshold
        cats = ([models.category] if models.approach == "binary"
                else list(CATEGORIES))
        for start in range(0, len(sentences), batch_size):
            chunk = sentences[start:start + batch_size]
            probs = models.predict_probs([s.text for s in chunk],
                                         batch_size=batch_size)
            for row, sentence in zip(probs, chunk):
                for j, cat in enumerate(cats):
                    out[sentence.sentence_id][cat] = {
                        "prob": float(row[j]),
                        "label": int(row[j] >= thr),
                    }
        return out
    for cat, model in models.items():
        thr = threshold if threshold is not None else model.config.threshold
        for start in range(0, len(sentences), batch_size):
            chunk = sentences[start:start + batch_size]
            probs = model.predict_probs([s.text for s in chunk],
                                        batch_size=batch_size)
            for row, sentence in zip(probs, chunk):
                out[sentence.sentence_id][cat] = {
                    "prob": float(row[0]),
                    "label": int(row[0] >= thr),
                }
    return out


def write_predictions_jsonl(path, predictions):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sentence_id in sorted(predictions):
            for cat in CATEGORIES:
                entry = predictions[sentence_id].get(cat)
                if entry is None:
                    continue
                fh.write(json.dumps({
                    "sentence_id": sentence_id,
                    "category": cat.value,
                    "prob": entry["prob"],
                    "label": entry["label"],
                }) + "\n")


def read_predictions_jsonl(path):
    predictions = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            predictions.setdefault(obj["sentence_id"], {})[
                Category(obj["category"])
            ] = {"prob": float(obj["prob"]), "label": int(obj["label"])}
    return predictions


def save_model(model, out_dir):
    """Trained-model bundle: head.json + encoder checkpoint + config."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "approach": model.approach,
        "encoder_id": model.encoder.model_id,
        "category": model.category.value if model.category else None,
        "epoch_losses": model.epoch_losses,
    }
    (out / "config.json").write_text(
        json.dumps({"train": model.config.to_json(), **meta}, indent=2)
    )
    if model.head is not None:
        (out / "head.json").write_text(json.dumps(model.head.to_json()))
    torch.save(model.encoder.module.state_dict(), out / "encoder.pt")
    if model.adapters:
        state = {
            cat.value: {
                "adapter": adapter.state_dict(),
                "head": head.state_dict(),
            }
            for cat, (adapter, head) in model.adapters.items()
        }
        torch.save(state, out / "adapters.pt")


def load_model(out_dir, encoder):
    out = Path(out_dir)
    meta = json.loads((out / "config.json").read_text())
    encoder.module.load_state_dict(
        torch.load(out / "encoder.pt", weights_only=True)
    )
    encoder.module.eval()
    config = TrainConfig.from_json(meta["train"])
    model = FineTunedModel(
        encoder=encoder,
        approach=meta["approach"],
        config=config,
        category=Category(meta["category"]) if meta["category"] else None,
        epoch_losses=meta.get("epoch_losses", []),
    )
    head_path = out / "head.json"
    if head_path.exists():
        model.head = ClassifierHead.from_json(json.loads(head_path.read_text()))
    adapters_path = out / "adapters.pt"
    if adapters_path.exists():
        state = torch.load(adapters_path, weights_only=True)
        adapters = {}
        for cat in CATEGORIES:
            adapter = _Adapter(encoder.hidden_dim, config.adapter_bottleneck)
            head = nn.Linear(encoder.hidden_dim, 1)
            adapter.load_state_dict(state[cat.value]["adapter"])
            head.load_state_dict(state[cat.value]["head"])
            adapter.eval()
            head.eval()
            adapters[cat] = (adapter, head)
        model.adapters = adapters
    return model
