"""
SCMA codebooks, factor-graph combinatorics and distance spectra.

Codebook text format (see docs/codebook_format.md)::

    # optional comment lines
    M K d_s
    <K complex values for codeword 0>
    ...
    <K complex values for codeword M-1>

Complex values are written as ``re+imj`` (Python ``complex`` syntax).
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, List, NamedTuple, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from ..config.settings import MAX_RESOURCE_BLOCKS, NN_RTOL, UNIT_POWER_TOL
from ..utils.errors import (CodebookInvariantError, CodebookParseError,
                            DivisibilityError, DomainError)

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class IndicatorMatrix:
    """Binary K x L matrix mapping layers (columns) onto resource blocks (rows)."""
    entries: np.ndarray  # K x L, entries in {0, 1}
    d_s: int  # column weight

    @property
    def K(self) -> int:
        return int(self.entries.shape[0])

    @property
    def L(self) -> int:
        return int(self.entries.shape[1])

    def support(self, layer: int) -> Tuple[int, ...]:
        """Resource blocks occupied by ``layer``."""
        return tuple(int(k) for k in np.flatnonzero(self.entries[:, layer]))

    @property
    def rb_degree(self) -> int:
        """Number of layers colliding on each resource block (d_f)."""
        degrees = set(self.entries.sum(axis=1).tolist())
        if len(degrees) != 1:
            raise DomainError(f"Irregular indicator matrix, row weights {sorted(degrees)}")
        return int(degrees.pop())

    def factor_graph(self) -> nx.Graph:
        """Bipartite resource/layer factor graph used by message-passing receivers."""
        graph = nx.Graph()
        graph.add_nodes_from((("rb", k) for k in range(self.K)), bipartite=0)
        graph.add_nodes_from((("layer", l) for l in range(self.L)), bipartite=1)
        for k, l in zip(*np.nonzero(self.entries)):
            graph.add_edge(("rb", int(k)), ("layer", int(l)))
        return graph


class DistanceSpectrum(NamedTuple):
    """Pairwise distance summary of a codebook."""
    delta_min_sq: float  # minimum squared Euclidean distance over distinct pairs
    neighbor_count: Tuple[int, ...]  # nearest neighbours per codeword
    pair_distances: np.ndarray  # M x M squared distances, zero diagonal


class CodebookCheck(NamedTuple):
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


def check_codewords(codewords: np.ndarray, d_s: int) -> List[CodebookCheck]:
    """
    Evaluate every structural invariant of a codebook without raising.

    Args:
        codewords: M x K complex matrix
        d_s: Declared sparse degree

    Returns:
        One CodebookCheck per invariant, in a fixed order
    """
    cw = np.asarray(codewords, dtype=complex)
    checks: List[CodebookCheck] = []
    shape_ok = cw.ndim == 2 and cw.shape[0] >= 2 and cw.shape[1] >= 1
    checks.append(CodebookCheck("shape", shape_ok, float(cw.shape[0]) if cw.ndim == 2 else 0.0,
                                2.0, f"shape {cw.shape}, need M >= 2 rows"))
    if not shape_ok:
        return checks

    finite = bool(np.all(np.isfinite(cw)))
    checks.append(CodebookCheck("finite", finite, 0.0 if finite else 1.0, 0.0))
    if not finite:
        return checks

    support = np.flatnonzero(np.any(cw != 0, axis=0))
    checks.append(CodebookCheck("sparse_degree", len(support) == d_s, float(len(support)),
                                0.0, f"union support {tuple(support.tolist())}, declared d_s={d_s}"))

    power = np.sum(np.abs(cw) ** 2, axis=1)
    worst = float(np.max(np.abs(power - 1.0)))
    checks.append(CodebookCheck("unit_power", worst <= UNIT_POWER_TOL, worst, UNIT_POWER_TOL,
                                f"worst codeword power {float(power[np.argmax(np.abs(power - 1.0))]):.12g}"))

    distances = np.sum(np.abs(cw[:, None, :] - cw[None, :, :]) ** 2, axis=2)
    off_diagonal = distances[~np.eye(cw.shape[0], dtype=bool)]
    min_distance = float(off_diagonal.min())
    checks.append(CodebookCheck("distinct", min_distance > 0, min_distance, 0.0))
    return checks


def _raise_on_failure(checks: Sequence[CodebookCheck]) -> None:
    for check in checks:
        if not check.passed:
            raise CodebookInvariantError(check.name, check.detail or f"measured {check.measured}")


@dataclass(frozen=True)
class Codebook:
    """M codewords of length K whose non-zero entries share one d_s-element support."""
    codewords: np.ndarray  # M x K complex
    d_s: int
    name: str = "custom"
    support: Tuple[int, ...] = field(init=False)

    def __post_init__(self):
        cw = np.asarray(self.codewords, dtype=complex)
        _raise_on_failure(check_codewords(cw, self.d_s))
        object.__setattr__(self, "codewords", _frozen(cw))
        object.__setattr__(self, "support",
                           tuple(int(k) for k in np.flatnonzero(np.any(cw != 0, axis=0))))

    @property
    def M(self) -> int:
        return int(self.codewords.shape[0])

    @property
    def K(self) -> int:
        return int(self.codewords.shape[1])

    @cached_property
    def spectrum(self) -> DistanceSpectrum:
        return distance_spectrum(self)

    def for_layer(self, layer: int, indicator: IndicatorMatrix) -> "Codebook":
        """Re-seat the codewords on another layer's support, keeping their order."""
        if indicator.K != self.K or indicator.d_s != self.d_s:
            raise DomainError("Indicator matrix dimensions do not match the codebook")
        target = indicator.support(layer)
        moved = np.zeros_like(self.codewords)
        moved[:, list(target)] = self.codewords[:, list(self.support)]
        return Codebook(moved, self.d_s, name=f"{self.name}@layer{layer}")


def build_indicator(K: int, d_s: int) -> IndicatorMatrix:
    """
    Build the full-design indicator matrix whose columns enumerate every
    d_s-subset of the K resource blocks in lexicographic order.

    Raises:
        DomainError: Unless 1 < d_s <= K <= MAX_RESOURCE_BLOCKS
    """
    if not (1 < d_s <= K <= MAX_RESOURCE_BLOCKS):
        raise DomainError(
            f"build_indicator requires 1 < d_s <= K <= {MAX_RESOURCE_BLOCKS}, got K={K}, d_s={d_s}"
        )
    supports = list(itertools.combinations(range(K), d_s))
    entries = np.zeros((K, len(supports)), dtype=np.int8)
    for layer, rows in enumerate(supports):
        entries[list(rows), layer] = 1
    return IndicatorMatrix(_frozen(entries), d_s)


def codebook_count(L: int, T: int, K: int) -> int:
    """Number of distinguishable codebooks J = L*T/K."""
    if min(L, T, K) < 1:
        raise DomainError(f"L, T and K must be positive, got L={L}, T={T}, K={K}")
    if (L * T) % K:
        raise DivisibilityError(f"K={K} does not divide L*T={L * T}")
    return (L * T) // K


def overloading_factor(L: int, K: int) -> float:
    """Layers per resource block, L/K."""
    return L / K


def distance_spectrum(cb: Codebook) -> DistanceSpectrum:
    """Exhaustive pairwise squared distances and nearest-neighbour counts."""
    cw = cb.codewords
    distances = np.sum(np.abs(cw[:, None, :] - cw[None, :, :]) ** 2, axis=2)
    off_diagonal = ~np.eye(cb.M, dtype=bool)
    delta_min_sq = float(distances[off_diagonal].min())
    nearest = (distances <= delta_min_sq * (1.0 + NN_RTOL)) & off_diagonal
    neighbor_count = tuple(int(n) for n in nearest.sum(axis=1))
    return DistanceSpectrum(delta_min_sq, neighbor_count, _frozen(distances))


# Built-in stand-in designs: PSK labels per support coordinate, with per-coordinate
# amplitudes and fixed rotation angles (radians).
ROTATION_ANGLES = (0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8)

BUILTIN_DESIGNS: Dict[str, Dict] = {
    "sparse4": {
        "M": 4, "K": 4, "support": (0, 1),
        "amplitudes": (math.sqrt(0.5), math.sqrt(0.5)),
        "labels": ((0, 1, 2, 3), (0, 3, 2, 1)),
    },
    "dense4": {
        # coordinates 0-2 each place one perfect matching of the four codewords
        # at opposite phases, so every pair is separated on at least one coordinate
        "M": 4, "K": 4, "support": (0, 1, 2, 3),
        "amplitudes": (0.5, 0.5, 0.5, 0.5),
        "labels": ((0, 2, 1, 3), (0, 1, 2, 3), (0, 1, 3, 2), (0, 1, 2, 3)),
    },
    "sparse8": {
        "M": 8, "K": 4, "support": (0, 1),
        "amplitudes": (math.sqrt(0.6), math.sqrt(0.4)),
        "labels": (tuple(range(8)), tuple((3 * m) % 8 for m in range(8))),
    },
    "dense8": {
        "M": 8, "K": 4, "support": (0, 1, 2, 3),
        "amplitudes": (0.5, 0.5, 0.5, 0.5),
        "labels": tuple(tuple((a * m) % 8 for m in range(8)) for a in (1, 3, 5, 7)),
    },
}


def builtin_codewords(kind: str) -> np.ndarray:
    """Raw M x K codeword matrix of a built-in design (unvalidated)."""
    try:
        design = BUILTIN_DESIGNS[kind]
    except KeyError:
        raise DomainError(
            f"Unknown builtin codebook '{kind}', expected one of {sorted(BUILTIN_DESIGNS)}"
        ) from None
    M, K = design["M"], design["K"]
    codewords = np.zeros((M, K), dtype=complex)
    for s, (rb, amplitude, labels) in enumerate(
        zip(design["support"], design["amplitudes"], design["labels"])
    ):
        phases = 2 * np.pi * np.asarray(labels) / M + ROTATION_ANGLES[s]
        codewords[:, rb] = amplitude * np.exp(1j * phases)
    return codewords


def builtin_codebook(kind: str) -> Codebook:
    """Deterministic built-in codebook: sparse4, dense4, sparse8 or dense8."""
    codewords = builtin_codewords(kind)
    return Codebook(codewords, len(BUILTIN_DESIGNS[kind]["support"]), name=kind)


def _format_complex(value: complex) -> str:
    return f"{value.real:.17g}{value.imag:+.17g}j"


def save_codebook(cb: Codebook, path: Union[str, Path]) -> None:
    """Write a codebook in the text format read by load_codebook."""
    lines = [f"# codebook {cb.name}", f"{cb.M} {cb.K} {cb.d_s}"]
    lines.extend(" ".join(_format_complex(v) for v in row) for row in cb.codewords)
    Path(path).write_text("\n".join(lines) + "\n")


def _tokens(line: str) -> List[Tuple[int, str]]:
    """Whitespace-separated tokens with their 1-based start column."""
    tokens = []
    column = 0
    for part in line.split():
        column = line.index(part, column)
        tokens.append((column + 1, part))
        column += len(part)
    return tokens


def parse_codebook(text: str, source: str = "<string>", name: str = "custom") -> Codebook:
    """
    Parse codebook text.

    Raises:
        CodebookParseError: On malformed header, values or row lengths
        CodebookInvariantError: When the parsed codebook violates an invariant
    """
    rows: List[Tuple[int, str]] = [
        (number, line) for number, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not rows:
        raise CodebookParseError("empty codebook file, expected header 'M K d_s'", source, 1, 1)

    header_line, header = rows[0]
    header_tokens = _tokens(header)
    if len(header_tokens) != 3:
        raise CodebookParseError(
            f"header must hold exactly 3 integers 'M K d_s', found {len(header_tokens)} fields",
            source, header_line, 1,
        )
    dims = []
    for column, token in header_tokens:
        try:
            dims.append(int(token))
        except ValueError:
            raise CodebookParseError(f"header field '{token}' is not an integer",
                                     source, header_line, column) from None
    M, K, d_s = dims
    if M < 1 or K < 1:
        raise CodebookParseError(f"header declares M={M}, K={K}", source, header_line, 1)

    data = rows[1:]
    if len(data) != M:
        line = data[M][0] if len(data) > M else (data[-1][0] + 1 if data else header_line + 1)
        raise CodebookParseError(f"expected {M} codeword rows, found {len(data)}", source, line, 1)

    codewords = np.zeros((M, K), dtype=complex)
    for m, (line_number, line) in enumerate(data):
        tokens = _tokens(line)
        if len(tokens) != K:
            column = tokens[K][0] if len(tokens) > K else len(line.rstrip()) + 1
            raise CodebookParseError(f"expected {K} values, found {len(tokens)}",
                                     source, line_number, column)
        for k, (column, token) in enumerate(tokens):
            try:
                value = complex(token)
            except ValueError:
                raise CodebookParseError(f"'{token}' is not a complex number",
                                         source, line_number, column) from None
            codewords[m, k] = value
    return Codebook(codewords, d_s, name=name)


def load_codebook(path: Union[str, Path]) -> Codebook:
    """Load and validate a codebook file."""
    path = Path(path)
    if not path.is_file():
        raise CodebookParseError("file not found", str(path), 0, 0)
    codebook = parse_codebook(path.read_text(), source=str(path), name=path.stem)
    logger.debug("Loaded codebook %s: M=%d K=%d d_s=%d", path, codebook.M, codebook.K, codebook.d_s)
    return codebook
