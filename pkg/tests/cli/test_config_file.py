# pylint: disable=redefined-outer-name, missing-function-docstring
import json

import pytest

from molforge.errors import ConfigError
from molforge.guidance import GuidanceConfig, PropertyTarget
from molforge.training import TrainConfig
from molforge.utils import MANIFEST_FILE, Manifest, build_config, file_sha256, read_config_file


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_header_is_optional(tmp_path):
    plain = write(tmp_path / "plain.ini", "seed = 3\nbatch-size = 4\n")
    section = write(tmp_path / "section.ini", "[molforge]\nseed = 3\nbatch_size = 4\n")
    assert read_config_file(plain) == read_config_file(section) == {"seed": "3", "batch_size": "4"}
    assert read_config_file(None) == {}


@pytest.mark.parametrize("text", ["[other]\nseed = 1\n", "seed\n= = =\n[molforge\n"])
def test_bad_files(tmp_path, text):
    with pytest.raises(ConfigError):
        read_config_file(write(tmp_path / "bad.ini", text))
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "missing.ini")


def test_flags_override_file_values(tmp_path):
    file_values = {"corpus": "a.smi", "run_dir": "run", "seed": "3", "epochs": "4", "descriptors": "HBD, HBA"}
    flags = {"seed": 9, "epochs": None}
    config = build_config(TrainConfig, file_values, flags, stage="pcm")
    assert config.seed == 9
    assert config.epochs == 4
    assert config.descriptors == ("HBD", "HBA")
    assert config.max_steps is None
    assert config.batch_size == TrainConfig.batch_size


def test_typed_guidance_values():
    values = {"scaffold": "c1ccncc1", "targets": "HBD:maximize:2, MolWeight:180", "w_s": "0.4", "w_p": "0.6"}
    config = build_config(GuidanceConfig, values, {"clamp_x0": "yes", "t2_boundary": "none"})
    assert config.targets == (PropertyTarget("HBD", weight=2.0), PropertyTarget("MolWeight", "target", 180.0))
    assert config.clamp_x0
    assert config.t2_boundary is None
    with pytest.raises(ConfigError):
        build_config(GuidanceConfig, {"clamp_x0": "maybe"})
    with pytest.raises(ConfigError):
        build_config(GuidanceConfig, {"w_s": "heavy"})


def test_manifest(tmp_path):
    data = write(tmp_path / "corpus.smi", "CCO\n")
    manifest = Manifest("stats", {"corpus": data}, seed=1, threads=2)
    manifest.add_input(data)
    path = manifest.write(tmp_path / "out")
    assert path.name == MANIFEST_FILE
    raw = json.loads(path.read_text(encoding="utf-8"))
    assert raw["inputs"] == {str(data): file_sha256(data)}
    assert raw["config"] == {"corpus": str(data)}
    assert set(raw["versions"]) == {"molforge", "torch", "numpy"}
    assert Manifest.load(path).finished == raw["finished"]
