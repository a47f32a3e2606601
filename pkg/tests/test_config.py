import pytest

from reviewlens.config import load_run_config, load_toml, loads_toml


def test_toml_scalars_and_tables():
    parsed = loads_toml(
        """
        # run settings
        seed = 7
        out_dir = "runs/a"
        encoder_ids = ["tiny-test", "tiny-test-b"]
        flag = true

        [train]
        learning_rate = 2e-5
        epochs = 3
        """
    )
    assert parsed["seed"] == 7
    assert parsed["out_dir"] == "runs/a"
    assert parsed["encoder_ids"] == ["tiny-test", "tiny-test-b"]
    assert parsed["flag"] is True
    assert parsed["train"]["learning_rate"] == 2e-5
    assert parsed["train"]["epochs"] == 3


def test_toml_inline_comment_and_hash_in_string():
    parsed = loads_toml('a = 5 # five\nb = "x # y"\n')
    assert parsed == {"a": 5, "b": "x # y"}


def test_toml_malformed_line_rejected():
    with pytest.raises(ValueError):
        loads_toml("just words\n")


def test_run_config_defaults():
    config = load_run_config()
    assert config.seed == 42
    assert config.train.learning_rate == 2e-5
    assert config.train.weight_decay == 0.01
    assert config.train.epochs == 3
    assert config.train.batch_size == 10
    assert config.train.threshold == 0.5


def test_run_config_file_and_overrides(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text(
        'seed = 5\nout_dir = "x"\n[train]\nepochs = 9\n', encoding="utf-8"
    )
    config = load_run_config(path, overrides={"seed": 6, "epochs": 2})
    assert config.seed == 6  # override wins over file
    assert config.out_dir == "x"
    assert config.train.epochs == 2


def test_run_config_unknown_key_rejected(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text("not_a_key = 1\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_run_config(path)


def test_load_toml_from_file(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text("x = 1.5\n", encoding="utf-8")
    assert load_toml(path) == {"x": 1.5}
