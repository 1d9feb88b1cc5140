import io
import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from symdyn import CodecParams, SourceModel, build_pm_dual, bsc_joint, decode
from symdyn.cli import main


def run(argv, stdin="", monkeypatch=None, capsys=None):
    monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(argv)
    return code, capsys.readouterr().out


@pytest.fixture
def bsc_file(tmp_path):
    path = tmp_path / "bsc.json"
    main(["ffwd", "build-model", "--p-y", "1/2,1/2", "--p-x-given-y", "3/4,1/4;1/4,3/4",
          "--output", str(path)])
    return path


def test_build_model(bsc_file):
    assert SourceModel.from_json(bsc_file.read_text()) == build_pm_dual(bsc_joint(F(1, 4)))


def test_lossless_round_trip(monkeypatch, capsys):
    code, out = run(["lossless", "encode", "--p-y", "1/2,1/2", "--rate", "4/3"], "1,0,1",
                    monkeypatch, capsys)
    assert code == 0 and json.loads(out) == {"m": 11, "success": True, "n": 3, "M": 16}
    code, out = run(["lossless", "decode", "--p-y", "1/2,1/2", "--rate", "4/3", "--m", "11",
                     "--n", "3"], "", monkeypatch, capsys)
    assert json.loads(out) == {"y": [1, 0, 1]}


def test_lossless_gauss(monkeypatch, capsys):
    _, out = run(["lossless", "encode", "--model", "gauss", "--rate", "6"], "2,2", monkeypatch,
                 capsys)
    m = json.loads(out)["m"]
    _, out = run(["lossless", "decode", "--model", "gauss", "--rate", "6", "--m", str(m),
                  "--n", "2"], "", monkeypatch, capsys)
    assert json.loads(out)["y"] == [2, 2]


def test_ffwd_encode_decode(bsc_file, monkeypatch, capsys):
    y = "0,1,1,0,0,0,1,0,1,1,0,0,1,0,0,0"
    _, out = run(["ffwd", "encode", "--model", str(bsc_file), "--rate", "3/4", "--delta", "1/4"],
                 y, monkeypatch, capsys)
    rec = json.loads(out)
    assert set(rec) == {"m", "success", "z", "attempts"}
    _, out = run(["ffwd", "decode", "--model", str(bsc_file), "--rate", "3/4", "--m",
                  str(rec["m"]), "--n", "16"], y, monkeypatch, capsys)
    ys = tuple(int(v) for v in y.split(","))
    expect = decode(build_pm_dual(bsc_joint(F(1, 4))), rec["m"], CodecParams(n=16, rate=F(3, 4)),
                    ys)
    assert json.loads(out)["x"] == list(expect)


def test_stream_decode_writes_before_reading(bsc_file):
    """Drive the process one line at a time: y_k is sent only after x_k arrives."""
    ys = [0, 1, 1, 0, 1]
    proc = subprocess.Popen(
        [sys.executable, "-m", "symdyn.cli", "ffwd", "decode", "--model", str(bsc_file),
         "--rate", "1", "--m", "3", "--n", str(len(ys)), "--stream"],
        stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True)
    got = []
    for yk in ys:
        got.append(int(proc.stdout.readline()))
        proc.stdin.write(f"{yk}\n")
        proc.stdin.flush()
    proc.stdin.close()
    assert proc.wait(timeout=30) == 0
    expect = decode(build_pm_dual(bsc_joint(F(1, 4))), 3, CodecParams(n=5, rate=F(1)), ys)
    assert tuple(got) == expect


def test_harness_exit_codes(tmp_path, monkeypatch, capsys):
    cfg = {"kind": "lossless_rate", "model": {"p_y": ["1/2", "1/2"]}, "params": {"n": 16},
           "blocks": 3, "seed": 0, "output": str(tmp_path / "out.json"),
           "assertions": [{"stat": "mean_rate", "op": "==", "value": 1.0}]}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    code, out = run(["harness", "run", str(path)], "", monkeypatch, capsys)
    assert code == 0 and json.loads(out)["passed"]
    assert (tmp_path / "out.csv").exists()
    cfg["assertions"][0]["value"] = 2.0
    path.write_text(json.dumps(cfg))
    code, _ = run(["harness", "run", str(path)], "", monkeypatch, capsys)
    assert code == 1
