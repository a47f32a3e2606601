"""Encoder abstraction: a tokenizer plus a torch module producing hidden
states, with CLS pooling (first token, final layer).

Two families are supported:
  - tiny test encoders ("tiny-test", "tiny-test-<n>"): small transformers
    with a hashed vocabulary, built deterministically from the model id;
  - local checkpoints under a models directory, loaded through the
    `transformers` package when installed (training runs offline, so a
    missing local copy is a cache miss, never a download).
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from ..errors import ModelNotFound, OfflineCacheMiss

PAD_ID = 0
CLS_ID = 1

TINY_VOCAB = 2048
TINY_HIDDEN = 32
TINY_LAYERS = 2
TINY_HEADS = 4
TINY_MAX_TOKENS = 512


def _hash_token(token, vocab_size):
    digest = hashlib.md5(token.encode("utf-8")).digest()
    return 2 + int.from_bytes(digest[:4], "big") % (vocab_size - 2)


class HashedTokenizer:
    """Whitespace tokenizer with a hashed vocabulary; no OOV tokens."""

    def __init__(self, vocab_size=TINY_VOCAB, max_tokens=TINY_MAX_TOKENS):
        self.vocab_size = vocab_size
        self.max_tokens = max_tokens
        self.sep_token = "[SEP]"

    def encode(self, text):
        ids = [CLS_ID]
        for token in text.lower().split():
            ids.append(_hash_token(token, self.vocab_size))
        return ids[: self.max_tokens]

    def batch(self, texts):
        encoded = [self.encode(t) for t in texts]
        width = max(len(e) for e in encoded)
        input_ids = torch.full((len(encoded), width), PAD_ID, dtype=torch.long)
        mask = torch.zeros((len(encoded), width), dtype=torch.long)
        for i, ids in enumerate(encoded):
            input_ids[i, : len(ids)] = torch.tensor(ids, dtype=torch.long)
            mask[i, : len(ids)] = 1
        return input_ids, mask


class _Block(nn.Module):
    """Transformer block initialized to an averaging state.

    Query/key projections start at zero (uniform attention) and the
    value/output projections at identity, so the untrained encoder pools
    token content into the CLS state the way a pretrained model would;
    fine-tuning then shapes it further. All weights remain trainable.
    """

    def __init__(self, hidden_dim, n_heads):
        super().__init__()
        self.attn = nn.MultiheadAttention(hidden_dim, n_heads, batch_first=True)
        self.ff1 = nn.Linear(hidden_dim, 2 * hidden_dim)
        self.ff2 = nn.Linear(2 * hidden_dim, hidden_dim)
        self.ln1 = nn.LayerNorm(hidden_dim)
        self.ln2 = nn.LayerNorm(hidden_dim)
        with torch.no_grad():
            self.attn.in_proj_weight.zero_()
            self.attn.in_proj_weight[2 * hidden_dim:, :] = torch.eye(hidden_dim)
            self.attn.in_proj_bias.zero_()
            self.attn.out_proj.weight.copy_(torch.eye(hidden_dim))
            self.attn.out_proj.bias.zero_()
            self.ff2.weight.mul_(0.1)

    def forward(self, x, pad_mask):
        attn_out, _ = self.attn(x, x, x, key_padding_mask=pad_mask)
        x = self.ln1(x + attn_out)
        return self.ln2(x + self.ff2(torch.relu(self.ff1(x))))


class TinyTransformer(nn.Module):
    """Small deterministic transformer used as a stand-in encoder."""

    def __init__(self, vocab_size, hidden_dim, n_layers, n_heads, max_tokens):
        super().__init__()
        self.embedding = nn.Embedding(vocab_size, hidden_dim, padding_idx=PAD_ID)
        self.positions = nn.Embedding(max_tokens, hidden_dim)
        with torch.no_grad():
            self.positions.weight.mul_(0.1)
        self.blocks = nn.ModuleList(
            [_Block(hidden_dim, n_heads) for _ in range(n_layers)]
        )

    def forward(self, input_ids, attention_mask):
        positions = torch.arange(input_ids.shape[1], device=input_ids.device)
        x = self.embedding(input_ids) + self.positions(positions)[None, :, :]
        pad_mask = attention_mask == 0
        for block in self.blocks:
            x = block(x, pad_mask)
        return x


@dataclass
class EncoderModel:
    model_id: str
    module: nn.Module
    tokenizer: object
    hidden_dim: int
    max_tokens: int
    sep_token: str = "[SEP]"

    def encode(self, texts, batch_size=32):
        """CLS embeddings (first token, final layer) in inference mode."""
        self.module.eval()
        chunks = []
        with torch.no_grad():
            for start in range(0, len(texts), batch_size):
                batch = texts[start:start + batch_size]
                input_ids, mask = self.tokenizer.batch(batch)
                hidden = self.module(input_ids, mask)
                chunks.append(hidden[:, 0, :].numpy())
        return np.concatenate(chunks, axis=0)

    def parameter_state(self):
        """Snapshot of encoder parameters, for freeze checks."""
        return {k: v.detach().clone() for k, v in self.module.state_dict().items()}


def _build_tiny(model_id):
    seed = int.from_bytes(hashlib.md5(model_id.encode()).digest()[:4], "big")
    # deterministic init independent of the global RNG
    saved_state = torch.random.get_rng_state()
    torch.manual_seed(seed)
    module = TinyTransformer(
        vocab_size=TINY_VOCAB,
        hidden_dim=TINY_HIDDEN,
        n_layers=TINY_LAYERS,
        n_heads=TINY_HEADS,
        max_tokens=TINY_MAX_TOKENS,
    )
    torch.random.set_rng_state(saved_state)
    tokenizer = HashedTokenizer()
    return EncoderModel(
        model_id=model_id,
        module=module,
        tokenizer=tokenizer,
        hidden_dim=TINY_HIDDEN,
        max_tokens=TINY_MAX_TOKENS,
        sep_token=tokenizer.sep_token,
    )


class _HFTokenizerAdapter:
    def __init__(self, tokenizer, max_tokens):
        self.tokenizer = tokenizer
        self.max_tokens = max_tokens
        self.sep_token = tokenizer.sep_token or "[SEP]"

    def batch(self, texts):
        out = self.tokenizer(
            list(texts),
            padding=True,
            truncation=True,
            max_length=self.max_tokens,
            return_tensors="pt",
        )
        return out["input_ids"], out["attention_mask"]


class _HFModuleAdapter(nn.Module):
    def __init__(self, model):
        super().__init__()
        self.model = model

    def forward(self, input_ids, attention_mask):
        return self.model(
            input_ids=input_ids, attention_mask=attention_mask
        ).last_hidden_state


def load_encoder(model_id, models_dir="models", max_tokens=512):
    """Resolve a model id against the local registry."""
    if model_id.startswith("tiny-test"):
        return _build_tiny(model_id)
    from pathlib import Path

    local = Path(models_dir) / model_id
    if local.is_dir():
        try:
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise ModelNotFound(
                f"{model_id}: local checkpoint present but the 'transformers' "
                "package is not installed"
            ) from exc
        tokenizer = AutoTokenizer.from_pretrained(str(local), local_files_only=True)
        model = AutoModel.from_pretrained(str(local), local_files_only=True)
        return EncoderModel(
            model_id=model_id,
            module=_HFModuleAdapter(model),
            tokenizer=_HFTokenizerAdapter(tokenizer, max_tokens),
            hidden_dim=model.config.hidden_size,
            max_tokens=max_tokens,
            sep_token=tokenizer.sep_token or "[SEP]",
        )
    if "/" in model_id:
        raise OfflineCacheMiss(
            f"{model_id}: not in local registry {models_dir}; training runs "
            "offline and never downloads"
        )
    raise ModelNotFound(model_id)


def encode_batch(encoder, texts, batch_size=32):
    """One CLS embedding per text; deterministic in inference mode."""
    if not texts:
        return np.zeros((0, encoder.hidden_dim))
    return encoder.encode(list(texts), batch_size=batch_size)
