import math

import pytest

from scarlab.config import RunConfig, load_config, parse_config, validate
from scarlab.errors import ConfigError, ParseError, ValidationError


def test_empty_config_defaults():
    cfg = parse_config("")
    assert cfg.r == pytest.approx(144.0) and cfg.resonant_index == 9
    assert cfg.l_xi == pytest.approx(2 * math.pi / 16)
    assert cfg.L == 1
    assert cfg.angle_bound == pytest.approx(144 ** (-5 / 200))


def test_comments_and_whitespace():
    cfg = parse_config("# header\n  r = 400   # trailing\n\ngrid_tau=128\n")
    assert cfg.r == 400.0 and cfg.grid_tau == 128


def test_resonant_index():
    assert parse_config("resonant_index = 3").r == pytest.approx(48.0)
    with pytest.raises(ValidationError):
        parse_config("resonant_index = 3\nr = 144")


def test_nonresonant_r_names_nearest():
    with pytest.raises(ValidationError, match="nearest resonant r=144"):
        parse_config("r = 148")


@pytest.mark.parametrize("text,line", [
    ("r = 144\nbogus = 1\n", 2),
    ("r 144\n", 1),
    ("r = 144\nr = 400\n", 2),
    ("\n\neta =\n", 3),
    ("grid_tau = 1.5\n", 1),
    ("eta = abc\n", 1),
])
def test_parse_errors_report_line(text, line):
    with pytest.raises(ParseError) as exc:
        parse_config(text)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


@pytest.mark.parametrize("text", ["grid_y = 4", "n_t = 7", "tol = 0", "eta = -1", "epsilon = 0",
                                  "mode = exact", "variant = other", "threads = 0", "angle_bound = 2"])
def test_validation_rejects(text):
    with pytest.raises(ValidationError):
        parse_config(text)


def test_octagon_group_sets_axis_length():
    cfg = parse_config("group = octagon\nr = %r" % (2 * math.pi * 240 / 3.057141838961996))
    assert cfg.l_xi == pytest.approx(3.057141838961996)
    with pytest.raises(ValidationError, match="disagrees"):
        parse_config("group = octagon\nl_xi = 1.0")


def test_errors_share_config_base():
    assert issubclass(ParseError, ConfigError) and issubclass(ValidationError, ConfigError)


def test_load_config_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("r = 48\nseed = 7\n")
    cfg = load_config(p)
    assert cfg.r == 48.0 and cfg.seed == 7
    assert cfg.as_dict()["seed"] == 7
    assert validate(RunConfig()).r == pytest.approx(144.0)
