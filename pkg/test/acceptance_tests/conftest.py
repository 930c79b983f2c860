import pytest

from freqprint.classifier import evaluate, fit
from freqprint.nn import TrainConfig
from freqprint.synth import SynthConfig, default_template_bank, generate
from freqprint.traces import split_dataset

DESK_CLASSES = 10
DESK_SAMPLES = 500
DESK_TRACES_PER_CLASS = 50


@pytest.fixture(scope="session")
def desk_train_config():
    return TrainConfig(learning_rate=1e-3, batch_size=16, max_epochs=40, early_stop_patience=8, seed=0)


@pytest.fixture(scope="session")
def desk_bank():
    return default_template_bank(DESK_CLASSES, DESK_SAMPLES, seed=0)


@pytest.fixture(scope="session")
def desk_dataset_factory(desk_bank):
    def make(disturbers=0):
        cfg = SynthConfig(
            templates=tuple(desk_bank),
            n_samples=DESK_SAMPLES,
            traces_per_class=DESK_TRACES_PER_CLASS,
            seed=0,
            concurrent_disturbers=disturbers,
        )
        return split_dataset(generate(cfg), seed=0)

    return make


@pytest.fixture(scope="session")
def desk_dataset(desk_dataset_factory):
    return desk_dataset_factory(0)


@pytest.fixture(scope="session")
def clean_model(desk_dataset, desk_train_config):
    return fit(desk_dataset, "native", desk_train_config).model


@pytest.fixture(scope="session")
def clean_report(clean_model, desk_dataset):
    return evaluate(clean_model, desk_dataset)
