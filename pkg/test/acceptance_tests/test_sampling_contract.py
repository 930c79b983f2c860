import pytest

from freqprint.sampler import CampaignSpec, CampaignTarget, SamplerConfig, collect_measurement, run_campaign
from freqprint.traces import read_dataset
from test.unit_tests.fixtures.doubles import ManualClock, RecordingTargetRunner, ScriptedFrequencySource

pytestmark = pytest.mark.acceptance


def test_measurement_reads_on_exact_deadlines():
    clock = ManualClock(start=250.0)
    source = ScriptedFrequencySource({0: [800_000, 2_800_000, 1_400_000]}, clock=clock)
    cfg = SamplerConfig(num_samples=4000, interval_ms=10)

    [trace] = collect_measurement(cfg, "launch", "kill", source=source, clock=clock, runner=RecordingTargetRunner())

    times = source.read_times(0)
    assert len(times) == 4000
    assert times == [250.0 + k * 0.01 for k in range(4000)]
    assert len(trace) == 4000
    assert trace.samples[:4] == (800_000, 2_800_000, 1_400_000, 1_400_000)


def test_campaign_sleeps_between_measurements(tmp_path):
    clock = ManualClock()
    source = ScriptedFrequencySource({0: [800_000]}, clock=clock)
    runner = RecordingTargetRunner()
    targets = tuple(CampaignTarget(label=f"image-{i}", launch=f"run {i}", kill=f"kill {i}") for i in range(3))
    sleeps = []

    run_campaign(
        SamplerConfig(num_samples=4000),
        CampaignSpec(targets=targets, measurements_per_target=2),
        tmp_path,
        source,
        clock,
        runner,
        sleep=sleeps.append,
    )

    assert sleeps == [5.0] * 5
    assert runner.calls[:2] == [("launch", "run 0"), ("kill", "kill 0")]
    assert len(read_dataset(tmp_path)) == 6
