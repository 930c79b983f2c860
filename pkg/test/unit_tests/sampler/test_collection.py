import pytest

from freqprint.sampler import SamplerConfig, collect_measurement
from freqprint.utils.errors import InvalidArgumentError, PartialMeasurementError, TargetError
from test.unit_tests.fixtures.doubles import RecordingTargetRunner, ScriptedFrequencySource


def test_reads_happen_on_exact_deadlines(manual_clock, target_runner):
    cfg = SamplerConfig(interval_ms=10, num_samples=4000)
    source = ScriptedFrequencySource({0: [800_000, 2_800_000, 1_400_000]}, clock=manual_clock)

    (trace,) = collect_measurement(cfg, "docker run redis", "docker kill redis", source, manual_clock, target_runner)

    expected = [100.0 + k * 0.01 for k in range(4000)]
    assert len(source.reads[0]) == 4000
    assert manual_clock.deadlines == expected
    assert source.read_times(0) == expected
    assert len(trace) == 4000
    assert trace.samples[:4] == (800_000, 2_800_000, 1_400_000, 1_400_000)
    assert trace.interval_ms == 10
    assert trace.start_time == manual_clock.start_wall_ms


def test_target_is_launched_before_and_killed_after_sampling(manual_clock, target_runner):
    cfg = SamplerConfig(num_samples=3)
    source = ScriptedFrequencySource({0: [1]}, clock=manual_clock)
    collect_measurement(cfg, "launch-cmd", "kill-cmd", source, manual_clock, target_runner, meta={"label": "x"})
    assert target_runner.calls == [("launch", "launch-cmd"), ("kill", "kill-cmd")]


def test_every_core_gets_its_own_trace(manual_clock, target_runner):
    cfg = SamplerConfig(num_samples=50, cores=(2, 0))
    source = ScriptedFrequencySource({0: [800_000], 2: [2_800_000]}, clock=manual_clock)

    traces = collect_measurement(cfg, "l", "k", source, manual_clock, target_runner, meta={"label": "redis"})

    assert [t.core_id for t in traces] == [2, 0]
    assert traces[0].samples == (2_800_000,) * 50
    assert traces[1].samples == (800_000,) * 50
    assert all(t.meta == {"label": "redis"} for t in traces)


def test_all_cores_read_on_one_start_grid(manual_clock, target_runner):
    cfg = SamplerConfig(num_samples=200, interval_ms=5, cores=(0, 1, 2, 3))
    source = ScriptedFrequencySource({core: [800_000] for core in cfg.cores}, clock=manual_clock)

    traces = collect_measurement(cfg, "l", "k", source, manual_clock, target_runner)

    expected = [100.0 + k * 0.005 for k in range(200)]
    for core in cfg.cores:
        assert source.read_times(core) == expected
    assert {t.start_time for t in traces} == {manual_clock.start_wall_ms}


def test_failed_read_aborts_with_partial_samples(manual_clock, target_runner):
    cfg = SamplerConfig(num_samples=100, cores=(0, 1))
    source = ScriptedFrequencySource({0: [1], 1: [2]}, clock=manual_clock, fail_after={1: 3})

    with pytest.raises(PartialMeasurementError) as exc_info:
        collect_measurement(cfg, "l", "k", source, manual_clock, target_runner)

    assert exc_info.value.partial[1] == [2, 2, 2]
    assert len(exc_info.value.partial[0]) <= 100
    assert exc_info.value.details == {"cause": "AccessError"}
    assert target_runner.calls[-1] == ("kill", "k")


def test_failed_launch_does_not_sample(manual_clock):
    runner = RecordingTargetRunner(failing_launches=["broken"])
    source = ScriptedFrequencySource({0: [1]}, clock=manual_clock)
    with pytest.raises(TargetError):
        collect_measurement(SamplerConfig(num_samples=5), "broken", "k", source, manual_clock, runner)
    assert source.reads[0] == []
    assert runner.calls == [("launch", "broken")]


@pytest.mark.parametrize(
    "kwargs",
    [{"interval_ms": 0}, {"num_samples": 0}, {"inter_measurement_sleep_s": -1}, {"cores": ()}, {"cores": (1, 1)}],
)
def test_invalid_sampler_config(kwargs):
    with pytest.raises(InvalidArgumentError):
        SamplerConfig.create(**kwargs)


def test_measurement_seconds():
    assert SamplerConfig().measurement_seconds == 40.0
