# Copyright 2023 freqprint contributors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Online phase: classify one freshly collected trace."""

from pathlib import Path

import typer

from freqprint.classifier import predict as rank_trace
from freqprint.nn import load_model
from freqprint.traces import read_trace_file


def predict(
    model: Path = typer.Option(..., "--model", help="Model file."),
    trace: Path = typer.Option(..., "--trace", help="Trace file to classify."),
    top: int = typer.Option(5, "--top", min=1, help="Number of ranked labels to print."),
) -> None:
    """Print the most likely labels of a trace as `label<TAB>probability` lines."""
    ranking = rank_trace(load_model(model), read_trace_file(trace))
    for label, probability in ranking[:top]:
        typer.echo(f"{label}\t{probability:.6f}")
