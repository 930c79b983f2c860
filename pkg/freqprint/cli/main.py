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

import sys
from typing import List, Optional

import click
import structlog
import typer

from freqprint.cli import defense, offline, online
from freqprint.utils.errors import FreqprintError, error_state_to_dict
from freqprint.utils.logging import initialise_logging

logger = structlog.get_logger(__name__)

app = typer.Typer(name="freqprint", help="Fingerprint workloads through CPU frequency traces.", add_completion=False)
app.command("collect")(offline.collect)
app.command("synth")(offline.synth)
app.command("train")(offline.train)
app.command("eval")(offline.eval_model)
app.command("sweep")(offline.sweep)
app.command("report-activity")(offline.report_activity)
app.command("predict")(online.predict)
app.command("noise-inject")(defense.noise_inject)
app.command("detect")(defense.detect)


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command line and return its exit code.

    0 on success, 1 when the command failed, 2 for usage errors.
    """
    initialise_logging()
    command = typer.main.get_command(app)
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        result = command.main(args=args, prog_name="freqprint", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        typer.echo("freqprint: aborted", err=True)
        return 1
    except (FreqprintError, OSError) as e:
        logger.debug("Command failed", **error_state_to_dict(e))
        typer.echo(f"freqprint: error: {e}", err=True)
        return 1
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
