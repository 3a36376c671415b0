"""Plain-text code files.

Format (``#`` starts a comment, blank lines are ignored)::

    label: four-qubit deletion code
    q: 2
    N: 4
    d: 2

    codeword 0
    0000  0.7071067811865476  0
    1111  0.7071067811865476  0

    codeword 1
    ...

Each codeword block lists ``<basis string> <re> <im>`` lines; basis strings
have length N over the digits ``0..q-1``. Missing basis states have
amplitude zero.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .kl import CodeError, QuantumCode

NORM_TOL = 1e-8
BUNDLED = Path(__file__).with_name("data") / "four_qubit_deletion.code"


class CodeFileError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _header_int(header: dict, key: str) -> int:
    if key not in header:
        raise CodeFileError(f"missing header field {key!r}")
    value, line = header[key]
    try:
        out = int(value)
    except ValueError:
        raise CodeFileError(f"{key} must be an integer, got {value!r}", line) from None
    if out < 1:
        raise CodeFileError(f"{key} must be positive", line)
    return out


def parse_code(text: str, tol: float = NORM_TOL) -> QuantumCode:
    header: dict[str, tuple[str, int]] = {}
    blocks: list[dict[str, tuple[complex, int]]] = []
    block_lines: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("codeword"):
            parts = line.split()
            if len(parts) != 2 or not parts[1].isdigit() or int(parts[1]) != len(blocks):
                raise CodeFileError(f"expected 'codeword {len(blocks)}', got {line!r}", lineno)
            blocks.append({})
            block_lines.append(lineno)
            continue
        if not blocks:
            key, sep, value = line.partition(":")
            if not sep:
                raise CodeFileError(f"expected 'key: value' header line, got {line!r}", lineno)
            key = key.strip()
            if key not in ("label", "q", "N", "d"):
                raise CodeFileError(f"unknown header field {key!r}", lineno)
            header[key] = (value.strip(), lineno)
            continue
        parts = line.split()
        if len(parts) != 3:
            raise CodeFileError(f"expected '<basis> <re> <im>', got {line!r}", lineno)
        try:
            amp = complex(float(parts[1]), float(parts[2]))
        except ValueError:
            raise CodeFileError(f"bad amplitude {parts[1]!r} {parts[2]!r}", lineno) from None
        if not np.isfinite(amp):
            raise CodeFileError("non-finite amplitude", lineno)
        if parts[0] in blocks[-1]:
            raise CodeFileError(f"basis string {parts[0]} repeated", lineno)
        blocks[-1][parts[0]] = (amp, lineno)

    q, N = _header_int(header, "q"), _header_int(header, "N")
    if q < 2:
        raise CodeFileError("q must be at least 2", header["q"][1])
    d = _header_int(header, "d") if "d" in header else len(blocks)
    if len(blocks) != d:
        raise CodeFileError(f"header declares d = {d} but the file has {len(blocks)} codewords")
    vecs = np.zeros((d, q**N), dtype=complex)
    for k, block in enumerate(blocks):
        for basis, (amp, lineno) in block.items():
            if len(basis) != N or any(not c.isdigit() or int(c) >= q for c in basis):
                raise CodeFileError(f"basis string {basis!r} is not {N} digits below {q}", lineno)
            vecs[k, int(np.ravel_multi_index(tuple(int(c) for c in basis), (q,) * N))] = amp
    for k in range(d):
        norm = np.linalg.norm(vecs[k])
        if abs(norm - 1) > tol:
            raise CodeFileError(f"codeword {k} has norm {norm:.12g}", block_lines[k])
    for a in range(d):
        for b in range(a + 1, d):
            overlap = abs(np.vdot(vecs[a], vecs[b]))
            if overlap > tol:
                raise CodeFileError(f"codewords {a} and {b} are not orthogonal: |<{a}|{b}>| = {overlap:.6g}", block_lines[b])
    label = header["label"][0] if "label" in header else ""
    try:
        return QuantumCode(q, N, vecs, label, ortho_tol=tol)
    except CodeError as exc:
        raise CodeFileError(str(exc)) from None


def render_code(code: QuantumCode) -> str:
    lines = [f"label: {code.label}", f"q: {code.q}", f"N: {code.N}", f"d: {code.d}"]
    for k, vec in enumerate(code.codewords):
        lines += ["", f"codeword {k}"]
        for idx in np.flatnonzero(vec):
            basis = "".join(str(int(x)) for x in np.unravel_index(idx, (code.q,) * code.N))
            lines.append(f"{basis} {float(vec[idx].real)!r} {float(vec[idx].imag)!r}")
    return "\n".join(lines) + "\n"


def load_code(path: str | Path) -> QuantumCode:
    return parse_code(Path(path).read_text())


def bundled_code() -> QuantumCode:
    return load_code(BUNDLED)
