import pytest

from famgraph.config import CONFIG_ENV, DEFAULTS, ConfigError, config_hash, load_config, parse_config


def test_parse_types_and_comments():
    cfg = parse_config("""
        # experiment recipe
        seed = 7
        grid_search = yes   # tune
        feature_sets = graph, markov
        gamma = 0.125
    """)
    assert cfg == {"seed": 7, "grid_search": True, "feature_sets": ("graph", "markov"), "gamma": 0.125}


def test_unknown_key_named():
    with pytest.raises(ConfigError, match="'n_trees'"):
        parse_config("n_trees = 5\n", "run.cfg")


def test_bad_value_and_line():
    with pytest.raises(ConfigError, match="run.cfg:2"):
        parse_config("seed = 1\nfolds = ten\n", "run.cfg")
    with pytest.raises(ConfigError, match="key = value"):
        parse_config("just words\n")


def test_precedence(tmp_path, monkeypatch):
    p = tmp_path / "a.cfg"
    p.write_text("seed = 3\nfolds = 5\n")
    cfg = load_config(p, {"folds": 4, "k": None})
    assert (cfg["seed"], cfg["folds"], cfg["k"]) == (3, 4, DEFAULTS["k"])
    monkeypatch.setenv(CONFIG_ENV, str(p))
    assert load_config()["seed"] == 3


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.cfg")


def test_hash_is_order_independent():
    a = {"seed": 1, "techniques": ("ci", "ir")}
    b = {"techniques": ["ci", "ir"], "seed": 1}
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash({**a, "seed": 2})
