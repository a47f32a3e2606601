import numpy as np
import pytest
import torch

from reviewlens.classify import encode_batch, load_encoder
from reviewlens.classify.encoder import CLS_ID, PAD_ID, HashedTokenizer
from reviewlens.errors import ModelNotFound, OfflineCacheMiss


def test_tokenizer_deterministic_and_in_range():
    tok = HashedTokenizer(vocab_size=2048, max_tokens=16)
    ids = tok.encode("The team is strong.")
    assert ids[0] == CLS_ID
    assert all(0 <= i < 2048 for i in ids)
    assert ids == tok.encode("The team is strong.")


def test_tokenizer_batch_padding_and_mask():
    tok = HashedTokenizer(vocab_size=2048, max_tokens=16)
    input_ids, mask = tok.batch(["one", "three words here"])
    assert input_ids.shape == mask.shape
    assert input_ids[0, -1].item() == PAD_ID
    assert mask.sum(dim=1)[0] < mask.sum(dim=1)[1]


def test_tokenizer_truncation():
    tok = HashedTokenizer(vocab_size=2048, max_tokens=4)
    ids = tok.encode("a b c d e f g h")
    assert len(ids) == 4


def test_tiny_encoder_loads_and_encodes():
    encoder = load_encoder("tiny-test")
    embeddings = encoder.encode(["a strong proposal", "a weak one"])
    assert embeddings.shape == (2, encoder.hidden_dim)
    assert np.isfinite(embeddings).all()


def test_tiny_encoder_deterministic_across_loads():
    a = load_encoder("tiny-test").encode(["same text"])
    b = load_encoder("tiny-test").encode(["same text"])
    assert np.array_equal(a, b)


def test_distinct_tiny_ids_differ():
    a = load_encoder("tiny-test").encode(["same text"])
    b = load_encoder("tiny-test-b").encode(["same text"])
    assert not np.array_equal(a, b)


def test_loading_does_not_disturb_global_rng():
    torch.manual_seed(0)
    before = torch.rand(3)
    torch.manual_seed(0)
    load_encoder("tiny-test")
    after = torch.rand(3)
    assert torch.equal(before, after)


def test_unknown_model_id():
    with pytest.raises(ModelNotFound):
        load_encoder("no-such-model")


def test_hub_style_id_requires_local_cache(tmp_path):
    with pytest.raises(OfflineCacheMiss):
        load_encoder("org/some-model", models_dir=tmp_path)


def test_encode_batch_matches_single():
    encoder = load_encoder("tiny-test")
    texts = [f"sentence number {i}" for i in range(7)]
    batched = encode_batch(encoder, texts, batch_size=3)
    singles = np.vstack([encoder.encode([t]) for t in texts])
    assert np.allclose(batched, singles, atol=1e-5)


def test_embedding_reflects_content():
    encoder = load_encoder("tiny-test")
    embeddings = encoder.encode(["alpha beta gamma", "delta epsilon zeta"])
    assert not np.allclose(embeddings[0], embeddings[1])
