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

import os
import re
import tempfile
from pathlib import Path
from typing import Union

import structlog

from freqprint.utils.errors import ParseError

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]

_UNSAFE_CHARS = re.compile(r"[^A-Za-z0-9_.-]")


def atomic_write_bytes(path: PathLike, data: bytes) -> Path:
    """Write `data` to `path` via a temporary file in the same directory and an atomic rename.

    Readers never observe a half written file, which keeps interrupted campaigns resumable.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp_name, target)
    except BaseException:
        logger.debug("Removing temporary file after failed write", file=tmp_name)
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return target


def atomic_write_text(path: PathLike, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def safe_name(label: str) -> str:
    """Turn a class label into something usable as a file or directory name.

    >>> safe_name("library/nginx:1.25")
    'library_nginx_1.25'
    >>> safe_name("redis")
    'redis'

    """
    return _UNSAFE_CHARS.sub("_", label) or "_"


def read_text_file(path: PathLike) -> str:
    """UTF-8 content of `path`; undecodable bytes are a `ParseError` on the line that holds them."""
    data = Path(path).read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"{path}: not valid UTF-8", line=data.count(b"\n", 0, e.start) + 1) from None
