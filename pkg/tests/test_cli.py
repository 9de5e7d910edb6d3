import json

import pytest

from cgebd import cli, codec, params as params_io

TINY_CFG = """
[model]
channels = 8
radius = 2
groups = 2
descriptor = 8
backbone_hidden = 8
[train]
steps = 2
"""


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def demo(tmp_path):
    assert run("synth", "--out-dir", tmp_path / "d") == 0
    assert run("encode", tmp_path / "d" / "demo.lcvr", "-o", tmp_path / "demo.lcvs") == 0
    return tmp_path


def test_smoke_path(demo, capsys):
    t = demo
    assert run("detect", t / "demo.lcvs", "-o", t / "det.json") == 0
    det = json.loads((t / "det.json").read_text())
    assert det[0]["video_id"] == "demo" and len(det[0]["scores"]) == 32
    assert run("eval", t / "det.json", t / "d" / "annotations.json", "--csv", t / "r.csv") == 0
    assert "F1" in capsys.readouterr().out
    assert (t / "r.csv").read_text().startswith("metric,")


def test_decode_accumulate(demo):
    t = demo
    assert run("decode", t / "demo.lcvs", "-o", t / "back.lcvr") == 0
    assert (t / "back.lcvr").read_bytes() == (t / "d" / "demo.lcvr").read_bytes()
    assert run("accumulate", t / "demo.lcvs", "--out-dir", t / "acc") == 0
    assert (t / "acc" / "demo.lcva").read_bytes()[:4] == b"LCVA"


def test_exit_codes(demo, capsys):
    t = demo
    blob = (t / "demo.lcvs").read_bytes()
    (t / "cut.lcvs").write_bytes(blob[:1000])
    assert run("decode", t / "cut.lcvs", "-o", t / "x.lcvr") == cli.EXIT_CORRUPT
    assert run("decode", t / "missing.lcvs", "-o", t / "x.lcvr") == cli.EXIT_MISSING
    (t / "bad.ini").write_text("[model]\nchannels = 30\n")
    assert run("--config", t / "bad.ini", "detect", t / "demo.lcvs") == cli.EXIT_CONFIG
    assert run("--config", t / "none.ini", "detect", t / "demo.lcvs") == cli.EXIT_MISSING
    (t / "tiny.ini").write_text(TINY_CFG)
    w = params_io.dump_weights({"fcn.conv0.weight": params_io.np.zeros((1, 1, 3, 3))},
                               {"model": {"channels": 8, "groups": 2, "descriptor": 8}})
    (t / "w.json").write_text(w)
    assert run("detect", t / "demo.lcvs", "--weights", t / "w.json") == cli.EXIT_SHAPE
    assert run("encode", t / "d" / "demo.lcvr", t / "d" / "demo.lcvr", "-o", t / "z") == cli.EXIT_CONFIG
    err = capsys.readouterr().err
    assert "corrupt stream" in err and "file not found" in err


def test_train_then_detect(tmp_path):
    t = tmp_path
    (t / "tiny.ini").write_text(TINY_CFG)
    assert run("synth", "--suite", 2, "--seed", 5, "--out-dir", t / "s") == 0
    raws = sorted((t / "s").glob("*.lcvr"))
    assert run("encode", *raws, "--out-dir", t / "enc") == 0
    streams = sorted((t / "enc").glob("*.lcvs"))
    assert run("--config", t / "tiny.ini", "train", *streams, "--annotations", t / "s" / "annotations.json",
               "--weights-out", t / "w.json", "--loss-csv", t / "loss.csv", "--quiet") == 0
    lines = (t / "loss.csv").read_text().splitlines()
    assert lines[0] == "step,loss" and len(lines) == 4
    p, meta = params_io.load_weights((t / "w.json").read_text())
    assert meta["model"]["channels"] == 8 and meta["seed"] == 0
    assert run("detect", *streams, "--weights", t / "w.json", "-o", t / "det.json") == 0
    assert len(json.loads((t / "det.json").read_text())) == 2


def test_baseline_eval_and_bench(tmp_path, capsys):
    t = tmp_path
    assert run("synth", "--suite", 3, "--seed", 1, "--out-dir", t) == 0
    assert run("baseline", *sorted(t.glob("*.lcvr")), "-o", t / "pred.json") == 0
    assert run("eval", t / "pred.json", t / "annotations.json") == 0
    assert run("bench", "--lengths", "2,4,8", "--size", 32, "--repeats", 1) == 0
    out = capsys.readouterr().out
    assert "R^2" in out and "backend" in out
    assert run("config") == 0
    assert "[codec]" in capsys.readouterr().out
