"""Shared fixtures.

The cross-component fixture is produced by invoking the upstream `lppa`
command line, never by importing its code: the JSONL export is the only
interface this package is allowed to rely on.
"""

import shutil
import subprocess

import pytest


def _lppa(*args) -> None:
    executable = shutil.which("lppa")
    if executable is None:
        pytest.skip("upstream lppa command not installed")
    subprocess.run([executable, *map(str, args)], check=True, capture_output=True)


@pytest.fixture(scope="session")
def export_4000(tmp_path_factory):
    """4000-record training export generated end-to-end by the upstream CLI."""
    base = tmp_path_factory.mktemp("export")
    aeg = base / "aeg.jsonl"
    spi = base / "spi.jsonl"
    mixed = base / "mixed.jsonl"
    train = base / "train.jsonl"
    _lppa("generate", "--mode", "aeg", "--count", 3000, "--seed", 1,
          "--endpoint", "mock:0", "--out", aeg)
    _lppa("generate", "--mode", "spi", "--count", 1000, "--seed", 2,
          "--endpoint", "mock:0", "--out", spi)
    _lppa("mix", "--a", aeg, "--b", spi, "--seed", 3, "--out", mixed)
    _lppa("export-train", "--in", mixed, "--out", train)
    return train


@pytest.fixture()
def small_dataset(tmp_path):
    """Three well-formed records written by hand."""
    lines = []
    for i in range(3):
        lines.append(
            '{"messages": ['
            '{"role": "system", "content": "You label PHI."}, '
            f'{{"role": "user", "content": "Here is the clinical note:\\nNote {i} '
            'for Ann Lee, aged 40."}, '
            '{"role": "assistant", "content": "{\\"PERSON\\": [\\"Ann Lee\\"], '
            '\\"AGE\\": [\\"40\\"]}"}]}'
        )
    path = tmp_path / "small.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
