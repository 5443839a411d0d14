"""Command modules; each exposes ``register(subparsers)``."""
import contextlib
import sys
from typing import Iterable, Iterator, List, Optional, TextIO

from chartcov.simgen import ScenarioTrace, read_traces


@contextlib.contextmanager
def output(path: Optional[str]) -> Iterator[TextIO]:
    """Open `path` for writing; None or '-' means stdout."""
    if path is None or path == '-':
        yield sys.stdout
        return
    with open(path, 'w', encoding='utf-8', newline='\n') as sink:
        yield sink


def load_traces(path: str) -> List[ScenarioTrace]:
    with open(path, encoding='utf-8') as source:
        return read_traces(source)


def emit(lines: Iterable[str]) -> None:
    for line in lines:
        print(line)
