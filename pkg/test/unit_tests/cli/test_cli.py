import io
import os

import pytest

from freqprint.cli.main import main
from freqprint.traces import read_dataset
from freqprint.types import Split

CPUFREQ = "/sys/devices/system/cpu/cpu1/cpufreq/scaling_cur_freq"


def _run(capsys, *args):
    code = main([str(arg) for arg in args])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _key_values(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


def _polling_events(pid, occurrences):
    lines = []
    for n in range(occurrences):
        for offset, name in enumerate(("fstat", "fadvise64", "read", "close")):
            lines.append(f"{n * 0.1 + offset * 0.001:.3f} {pid} {name} {CPUFREQ}\n")
    return "".join(lines)


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    model = root / "model.fpm"
    synth_args = ["--classes", "3", "--traces", "10", "--samples", "128", "--seed", "2", "--out", str(data)]
    assert main(["synth", *synth_args]) == 0
    assert main(["train", "--data", str(data), "--out", str(model), "--epochs", "3", "--batch-size", "8"]) == 0
    return data, model


def test_synth_writes_dataset_and_templates(tmp_path, capsys):
    code, out, _ = _run(capsys, "synth", "--classes", "2", "--traces", "5", "--samples", "64", "--out", tmp_path)
    assert code == 0
    values = _key_values(out)
    assert values["classes"] == "2"
    assert values["traces"] == "10"
    assert values["manifest"] == str(tmp_path / "manifest.tsv")
    assert (tmp_path / "templates.txt").exists()
    ds = read_dataset(tmp_path)
    assert len(ds) == 10
    assert {len(item.trace) for item in ds.items} == {64}


def test_synth_from_template_file(workspace, tmp_path, capsys):
    data, _ = workspace
    code, out, _ = _run(
        capsys, "synth", "--templates", data / "templates.txt", "--traces", "5", "--samples", "128", "--out", tmp_path
    )
    assert code == 0
    assert _key_values(out)["classes"] == "3"


def test_train_stores_a_split(workspace, tmp_path, capsys):
    data, _ = workspace
    assert all(tag != Split.UNASSIGNED for tag in read_dataset(data).split_assignment)

    model = tmp_path / "again.fpm"
    code, out, _ = _run(capsys, "train", "--data", data, "--out", model, "--epochs", "2", "--preset", "sandbox")
    assert code == 0
    values = _key_values(out)
    assert values["model"] == str(model)
    assert 1 <= int(values["best_epoch"]) <= int(values["epochs"]) <= 2
    assert 0.0 <= float(values["train_accuracy"]) <= 1.0
    assert 0.0 <= float(values["validation_accuracy"]) <= 1.0
    assert model.exists()


def test_eval(workspace, capsys):
    data, model = workspace
    code, out, _ = _run(capsys, "eval", "--model", model, "--data", data)
    assert code == 0
    values = _key_values(out)
    assert values["classes"] == "3"
    assert values["test_items"] == "6"
    assert float(values["top1"]) <= float(values["top3"]) <= float(values["top5"]) == 1.0
    assert out.splitlines()[0].split("\t")[0].strip() == "label"


def test_eval_other_split(workspace, capsys):
    data, model = workspace
    code, out, _ = _run(capsys, "eval", "--model", model, "--data", data, "--split", "train")
    assert code == 0
    assert _key_values(out)["test_items"] == "18"


def test_predict(workspace, capsys):
    data, model = workspace
    trace_file = sorted((data / "traces").rglob("*.trace"))[0]
    code, out, _ = _run(capsys, "predict", "--model", model, "--trace", trace_file, "--top", "2")
    assert code == 0
    lines = [line.split("\t") for line in out.splitlines()]
    assert len(lines) == 2
    probabilities = [float(p) for _, p in lines]
    assert probabilities == sorted(probabilities, reverse=True)
    assert all(label in read_dataset(data).classes for label, _ in lines)


def test_report_activity(workspace, capsys):
    data, model = workspace
    code, out, _ = _run(capsys, "report-activity", "--model", model, "--data", data)
    assert code == 0
    values = _key_values(out)
    assert values["classes"] == "3"
    assert "spearman" in values


def test_sweep(workspace, capsys):
    data, _ = workspace
    code, out, _ = _run(capsys, "sweep", "--data", data, "--sizes", "64,128", "--epochs", "1")
    assert code == 0
    rows = [[cell.strip() for cell in line.split("\t")] for line in out.strip().splitlines()]
    assert rows[0] == ["size", "top1", "top3", "top5"]
    assert [row[0] for row in rows[1:]] == ["64", "128"]


@pytest.mark.parametrize(
    "args",
    [
        ["sweep", "--data", "x", "--sizes", "a,b"],
        ["frobnicate"],
        ["train", "--data", "x"],
        ["noise-inject", "--n-repeat", "5"],
        ["predict", "--model", "m", "--trace", "t", "--top", "0"],
    ],
)
def test_usage_errors(capsys, args):
    code, _, err = _run(capsys, *args)
    assert code == 2
    assert err


def test_command_failure(tmp_path, capsys):
    code, out, err = _run(capsys, "train", "--data", tmp_path, "--out", tmp_path / "m.fpm")
    assert code == 1
    assert out == ""
    assert "freqprint: error: " in err
    assert "manifest.tsv" in err


def test_corrupt_model(workspace, tmp_path, capsys):
    data, _ = workspace
    model = tmp_path / "broken.fpm"
    model.write_bytes(b"not a model")
    code, _, err = _run(capsys, "eval", "--model", model, "--data", data)
    assert code == 1
    assert "freqprint: error: " in err


def test_detect_from_file(tmp_path, capsys):
    events = tmp_path / "events.txt"
    events.write_text(_polling_events(77, 50) + _polling_events(78, 49))
    code, out, _ = _run(capsys, "detect", "--events", events)
    assert code == 0
    assert out == "77\t4903.000\t50\n"


def test_detect_from_stdin_with_config(tmp_path, capsys, monkeypatch):
    config = tmp_path / "detector.conf"
    config.write_text("min_repetitions=3\n")
    monkeypatch.setattr("sys.stdin", io.StringIO(_polling_events(5, 3)))
    code, out, _ = _run(capsys, "detect", "--config", config)
    assert code == 0
    assert out == "5\t203.000\t3\n"


def test_detect_rejects_time_going_back(tmp_path, capsys):
    events = tmp_path / "events.txt"
    events.write_text("1.000 1 read /x\n0.500 1 read /x\n")
    code, _, err = _run(capsys, "detect", "--events", events)
    assert code == 1
    assert "line 2" in err


def test_detect_missing_events_file(tmp_path, capsys):
    code, _, err = _run(capsys, "detect", "--events", tmp_path / "missing.txt")
    assert code == 1
    assert "freqprint: error: " in err


def test_noise_inject_calibrate(capsys):
    code, out, _ = _run(capsys, "noise-inject", "--calibrate", "--kernel-iterations", "8192")
    assert code == 0
    assert float(_key_values(out)["repeat_duration_ms"]) > 0


@pytest.mark.hardware
@pytest.mark.skipif(not hasattr(os, "sched_getaffinity"), reason="needs CPU affinity support")
def test_noise_inject_writes_burst_log(tmp_path, capsys):
    log = tmp_path / "bursts.log"
    core = min(os.sched_getaffinity(0))
    code, out, _ = _run(
        capsys,
        "noise-inject",
        "--core",
        core,
        "--duration",
        "0.2",
        "--n-repeat",
        "1,2",
        "--t-sleep",
        "1,3",
        "--kernel-iterations",
        "8192",
        "--log",
        log,
    )
    assert code == 0
    bursts = int(_key_values(out)["bursts"])
    assert bursts > 0
    assert len(log.read_text().splitlines()) == bursts


@pytest.mark.parametrize(
    "command,flags",
    [
        ("collect", ["--spec", "--out", "--sysfs-root"]),
        ("synth", ["--classes", "--traces", "--samples", "--seed", "--disturbers", "--templates", "--out"]),
        ("train", ["--data", "--preset", "--seed", "--out", "--epochs", "--learning-rate", "--resplit"]),
        ("eval", ["--model", "--data", "--split", "--threshold-khz"]),
        ("sweep", ["--data", "--sizes", "--preset", "--seed"]),
        ("report-activity", ["--model", "--data", "--threshold-khz"]),
        ("predict", ["--model", "--trace", "--top"]),
        ("noise-inject", ["--core", "--duration", "--n-repeat", "--t-sleep", "--seed", "--log", "--calibrate"]),
        ("detect", ["--config", "--events"]),
    ],
)
def test_help(capsys, command, flags):
    code, out, _ = _run(capsys, command, "--help")
    assert code == 0
    for flag in flags:
        assert flag in out


def test_synth_is_reproducible(tmp_path, capsys):
    for name in ("one", "two"):
        args = ["--classes", "2", "--traces", "5", "--samples", "64", "--seed", "7", "--disturbers", "2"]
        assert _run(capsys, "synth", *args, "--out", tmp_path / name)[0] == 0
    first = sorted(p.relative_to(tmp_path / "one") for p in (tmp_path / "one").rglob("*") if p.is_file())
    second = sorted(p.relative_to(tmp_path / "two") for p in (tmp_path / "two").rglob("*") if p.is_file())
    assert first == second
    for relative in first:
        assert (tmp_path / "one" / relative).read_bytes() == (tmp_path / "two" / relative).read_bytes()


def test_detect_default_config_from_stdin(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO(_polling_events(1234, 60)))
    code, out, _ = _run(capsys, "detect", "--config", "default")
    assert code == 0
    assert out == "1234\t4903.000\t60\n"


def test_synth_and_train_accept_negative_seeds(tmp_path, capsys):
    data = tmp_path / "data"
    args = ["--classes", "2", "--traces", "5", "--samples", "64", "--seed", "-1", "--out", data]
    code, out, err = _run(capsys, "synth", *args)
    assert code == 0, err
    assert _key_values(out)["traces"] == "10"
    code, _, err = _run(capsys, "train", "--data", data, "--out", tmp_path / "m.fpm", "--epochs", "1", "--seed", "-5")
    assert code == 0, err
    assert all(tag != Split.UNASSIGNED for tag in read_dataset(data).split_assignment)


@pytest.mark.parametrize(
    "content,line",
    [
        (b"freqprint-trace v1\ninterval_ms=10\ncore_id=0\nstart_time=0\n\n\xff\xfe\n", 6),
        ("freqprint-trace v1\ninterval_ms=10\ncore_id=0\nstart_time=0\n\n800000\n²\n".encode(), 7),
    ],
)
def test_predict_on_malformed_trace_fails_cleanly(workspace, tmp_path, capsys, content, line):
    _, model = workspace
    trace_file = tmp_path / "bad.trace"
    trace_file.write_bytes(content)
    code, out, err = _run(capsys, "predict", "--model", model, "--trace", trace_file)
    assert code == 1
    assert out == ""
    assert "freqprint: error: " in err
    assert f"line {line}:" in err


def test_detect_on_undecodable_events_fails_cleanly(tmp_path, capsys):
    events = tmp_path / "events.txt"
    events.write_bytes(b"1.000 1 read /a/cpufreq/x\n1.001 1 \xff\xfe /a/cpufreq/x\n")
    code, _, err = _run(capsys, "detect", "--events", events)
    assert code == 1
    assert "UTF-8" in err
