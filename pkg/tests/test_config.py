import pytest

from xot.config import (
    DEFAULTS,
    ConfigError,
    config_hash,
    load_config,
    validate_config,
)


def test_defaults_load_and_validate():
    cfg = load_config()
    assert cfg == DEFAULTS
    assert cfg is not DEFAULTS
    validate_config(cfg)


def test_yaml_file_merges_over_defaults(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(
        "model: test-model\n"
        "plan:\n"
        "  mode: fixed\n"
        "  fixed_order: EP\n"
        "bench:\n"
        "  workers: 2\n",
        encoding="utf-8",
    )
    cfg = load_config(str(path))
    assert cfg["model"] == "test-model"
    assert cfg["plan"] == {"mode": "fixed", "fixed_order": "EP"}
    assert cfg["bench"]["workers"] == 2
    assert cfg["verify"]["mode"] == "passive_and_active"


def test_json_file_is_accepted(tmp_path):
    path = tmp_path / "run.json"
    path.write_text('{"refine_rounds": 1, "decoding": {"max_tokens": 256}}', encoding="utf-8")
    cfg = load_config(str(path))
    assert cfg["refine_rounds"] == 1
    assert cfg["decoding"]["max_tokens"] == 256


def test_unknown_key_is_rejected_with_dotted_path(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("plan:\n  moed: fixed\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="plan.moed"):
        load_config(str(path))


def test_dataset_overrides_accept_new_dataset_names(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(
        "verify:\n  dataset_overrides:\n    quiz: passive_only\n", encoding="utf-8"
    )
    cfg = load_config(str(path))
    assert cfg["verify"]["dataset_overrides"] == {"quiz": "passive_only"}


@pytest.mark.parametrize(
    "snippet,fragment",
    [
        ("methods: PEX\n", "methods"),
        ("mode: both\n", "mode"),
        ("refine_rounds: 2\n", "refine_rounds"),
        ("plan:\n  mode: magic\n", "plan.mode"),
        ("verify:\n  mode: sometimes\n", "verify.mode"),
        ("verify:\n  dataset_overrides:\n    quiz: never\n", "dataset_overrides"),
        ("prompts:\n  exemplar_count: 0\n", "exemplar_count"),
        ("prompts:\n  exemplar_seeds: []\n", "exemplar_seeds"),
        ("decoding:\n  temperature: -1\n", "temperature"),
        ("exec:\n  timeout_secs: 0\n", "timeout_secs"),
        ("gateway:\n  rate_per_min: 0\n", "rate_per_min"),
        ("bench:\n  workers: 0\n", "workers"),
    ],
)
def test_invalid_values_are_rejected(tmp_path, snippet, fragment):
    path = tmp_path / "run.yaml"
    path.write_text(snippet, encoding="utf-8")
    with pytest.raises(ConfigError, match=fragment):
        load_config(str(path))


def test_overrides_apply_after_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("model: from-file\n", encoding="utf-8")
    cfg = load_config(str(path), overrides={"model": "from-cli"})
    assert cfg["model"] == "from-cli"


def test_repetition_order_is_allowed():
    cfg = load_config(overrides={"methods": "PPP"})
    assert cfg["methods"] == "PPP"


def test_hash_is_stable_and_sensitive():
    base = load_config()
    again = load_config()
    changed = load_config(overrides={"refine_rounds": 1})
    assert config_hash(base) == config_hash(again)
    assert config_hash(base) != config_hash(changed)
    assert len(config_hash(base)) == 64


def test_malformed_yaml_reports_config_error(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("model: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_non_mapping_top_level_is_rejected(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("- a\n- b\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(path))
