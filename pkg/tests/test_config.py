import pytest

from cgebd.config import PipelineConfig, dump_config, load_config, parse_config
from cgebd.errors import ConfigError


def test_defaults():
    cfg = load_config()
    assert (cfg.codec.gop_size, cfg.codec.search_range, cfg.codec.lossless) == (12, 7, True)
    m = cfg.model
    assert (m.channels, m.samples, m.radius, m.groups, m.descriptor) == (32, 3, 8, 4, 32)
    assert (cfg.detect.threshold, cfg.detect.nms_radius) == (0.5, 2)
    assert (cfg.train.top_n_raters, cfg.train.alpha) == (2, 1.0)
    assert cfg.eval.thresholds[0] == 0.05 and cfg.eval.thresholds[-1] == 0.5
    assert len(cfg.eval.thresholds) == 10


def test_parse_and_dump_roundtrip():
    text = """
[codec]
gop_size = 8      ; shorter GOPs
lossless = false
[model]
channels = 8
groups = 2
backbone_hidden = 8
[eval]
thresholds = 0.1, 0.2
"""
    cfg = parse_config(text)
    assert cfg.codec.gop_size == 8 and not cfg.codec.lossless
    assert cfg.model.backbone_hidden == (8,)
    assert cfg.eval.thresholds == (0.1, 0.2)
    assert parse_config(dump_config(cfg)) == cfg
    assert parse_config(dump_config(PipelineConfig())) == PipelineConfig()


@pytest.mark.parametrize("text", [
    "[model]\nchannels = 30\ngroups = 4\n",
    "[codec]\ngop_size = 3\n[model]\nsamples = 3\n",
    "[codec]\nsearch_range = 0\n",
    "[detect]\nthreshold = 1.5\n",
    "[train]\nalpha = 0\n",
    "[eval]\nthresholds = 0.2, 0.1\n",
    "[bogus]\nx = 1\n",
    "[model]\nwhatever = 1\n",
    "[model]\nchannels = many\n",
    "not an ini file",
])
def test_rejects_bad_config(text):
    with pytest.raises(ConfigError):
        parse_config(text)
