"""JSON file format shared by the command-line tools.

Complex matrices are nested row-major arrays of ``[re, im]`` pairs.  Every
file carries a ``kind`` tag; ``load`` checks each kind's invariants and
returns the typed object.
"""

import json
import math
import os
import tempfile

import numpy as np

from . import chojam
from . import matkernel as mk
from .errors import PoptError
from .games import CorrelationTable
from .popt import TRACE_ATOL, PositivityEvidence, POPTState
from .povm import POVM, validate_povm
from .quantize import QuantumSimulation

KINDS = ("popt", "density", "povm_list", "table", "simulation")


class ParseError(PoptError):
    exit_code = 2


class InvariantViolation(PoptError):
    exit_code = 3


def encode_matrix(m):
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def encode_vector(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=np.complex128)]


def decode_matrix(obj, what="matrix"):
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what}: not a numeric array ({exc})") from None
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ParseError(f"{what}: expected an n x n array of [re, im] pairs, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{what}: non-finite entry")
    return arr[..., 0] + 1j * arr[..., 1]


def decode_vector(obj, what="vector"):
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what}: not a numeric array ({exc})") from None
    if arr.ndim != 2 or arr.shape[1] != 2 or not np.all(np.isfinite(arr)):
        raise ParseError(f"{what}: expected a finite list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def _reject_constant(name):
    raise ParseError(f"non-finite number {name} in JSON")


def parse(text):
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("kind") not in KINDS:
        raise ParseError(f"top level must be an object with kind in {KINDS}")
    return doc


def _dims(doc):
    dims = doc.get("dims")
    if not (isinstance(dims, list) and len(dims) == 2 and all(isinstance(x, int) and x >= 1 for x in dims)):
        raise ParseError(f"dims must be a pair of positive integers, got {dims!r}")
    return tuple(dims)


def _checked_operator(doc, key="matrix"):
    dims = _dims(doc)
    if key not in doc:
        raise ParseError(f"missing field {key!r}")
    m = decode_matrix(doc[key], key)
    n = dims[0] * dims[1]
    if m.shape != (n, n):
        raise InvariantViolation(f"{key} has shape {m.shape}, dims {dims} need {(n, n)}")
    if not mk.is_hermitian(m):
        raise InvariantViolation(f"{key} is not Hermitian")
    return dims, m


def _check_trace(m, atol, what):
    tr = complex(np.trace(m))
    if abs(tr - 1.0) > atol:
        raise InvariantViolation(f"{what}: trace {tr.real:.12g} is not 1 (tolerance {atol:g})")


def _load_popt(doc):
    dims, w = _checked_operator(doc)
    _check_trace(w, TRACE_ATOL, "popt")
    ev = doc.get("positivity_evidence")
    if ev is None:
        evidence = PositivityEvidence(float("nan"), 0, False)
    else:
        try:
            evidence = PositivityEvidence(
                float(ev["min_product_value"]), int(ev["restarts"]), bool(ev["certified_psd"])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad positivity_evidence record: {exc}") from None
    return POPTState(dims, w, evidence)


def _load_density(doc):
    dims, rho = _checked_operator(doc)
    _check_trace(rho, TRACE_ATOL, "density")
    if not mk.is_psd(rho):
        raise InvariantViolation("density matrix is not positive semidefinite")
    return rho


def _load_povm_list(doc):
    raw = doc.get("povms")
    if not isinstance(raw, list) or not raw:
        raise ParseError("povm_list needs a non-empty 'povms' array")
    out = []
    for i, els in enumerate(raw):
        if not isinstance(els, list) or not els:
            raise ParseError(f"povm {i}: expected a non-empty list of matrices")
        p = POVM(tuple(decode_matrix(e, f"povm {i}") for e in els))
        rep = validate_povm(p)
        if not rep.ok:
            raise InvariantViolation(f"povm {i} invalid: {rep}")
        out.append(p)
    return out


def _load_table(doc):
    shape = doc.get("shape")
    try:
        p = np.array(doc["p"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"table needs a numeric 'p' array ({exc})") from None
    if not isinstance(shape, list) or tuple(shape) != p.shape:
        raise ParseError(f"shape header {shape!r} does not match data shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ParseError("table has non-finite entries")
    if p.ndim == 2:
        frames = doc.get("frames")
        if not isinstance(frames, dict) or set(frames) != {"alice", "bob"}:
            raise ParseError("a 2-d tabulation needs frames {'alice': [...], 'bob': [...]}")
        ic_a = POVM(tuple(decode_matrix(e, "frames.alice") for e in frames["alice"]))
        ic_b = POVM(tuple(decode_matrix(e, "frames.bob") for e in frames["bob"]))
        for name, fr in (("alice", ic_a), ("bob", ic_b)):
            if not validate_povm(fr).ok:
                raise InvariantViolation(f"frames.{name} is not a POVM")
        if p.shape != (len(ic_a), len(ic_b)):
            raise InvariantViolation("tabulation shape does not match frame sizes")
        return Tabulation(p, ic_a, ic_b)
    if p.ndim != 4:
        raise ParseError(f"table must be 4-d (x, y, a, b) or a 2-d tabulation, got {p.ndim}-d")
    t = CorrelationTable(p)
    problems = t.check()
    if problems:
        raise InvariantViolation("table: " + "; ".join(problems))
    return t


def _load_simulation(doc):
    dims, sigma = _checked_operator(doc, "sigma")
    d = dims[0]
    if dims[0] != dims[1]:
        raise InvariantViolation("simulation needs equal local dimensions")
    psi = decode_vector(doc.get("psi"), "psi")
    M = decode_matrix(doc.get("M"), "M")
    try:
        eps = float(doc["epsilon"])
        units = np.array(doc["wtilde_units"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"simulation fields: {exc}") from None
    if not math.isfinite(eps) or eps < 0 or not np.all(np.isfinite(units)):
        raise ParseError("simulation: epsilon and wtilde_units must be finite, epsilon >= 0")
    if units.shape != (d, d, d, d, 2) or psi.shape != (d * d,) or M.shape != (d, d):
        raise InvariantViolation("simulation component shapes inconsistent with dims")
    _check_trace(sigma, 1e-8, "simulation sigma")
    if np.abs(sigma - mk.projector(psi)).max() > 1e-10:
        raise InvariantViolation("sigma is not |psi><psi|")
    wt = chojam.MatrixMap(units[..., 0] + 1j * units[..., 1])
    dec = chojam.UnitalDecomposition(M=mk.hermitize(M), Wtilde=wt, epsilon=eps, M_sqrt=mk.psd_sqrt(M))
    if dec.unitality_residual() > chojam.UNITAL_ATOL:
        raise InvariantViolation(f"Wtilde is not unital (residual {dec.unitality_residual():.3e})")
    return QuantumSimulation(d=d, sigma=sigma, psi=psi, decomposition=dec)


class Tabulation:
    """Oracle values on a pair of IC frames: ``T[a, b] = omega(E_a, F_b)``."""

    def __init__(self, T, ic_a, ic_b):
        self.T = np.asarray(T, dtype=float)
        self.ic_a = ic_a
        self.ic_b = ic_b


_LOADERS = {
    "popt": _load_popt,
    "density": _load_density,
    "povm_list": _load_povm_list,
    "table": _load_table,
    "simulation": _load_simulation,
}


def loads(text):
    doc = parse(text)
    try:
        return doc["kind"], _LOADERS[doc["kind"]](doc)
    except PoptError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ParseError(f"{doc['kind']}: {exc}") from None


def load(path):
    """Read ``path`` and return ``(kind, object)``."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    return loads(text)


# -- encoders ---------------------------------------------------------------


def popt_doc(state):
    return {
        "kind": "popt",
        "dims": list(state.dims),
        "matrix": encode_matrix(state.W),
        "positivity_evidence": state.evidence.to_dict(),
    }


def density_doc(rho, dims):
    return {"kind": "density", "dims": list(dims), "matrix": encode_matrix(rho)}


def povm_list_doc(povms):
    d = povms[0].dim
    return {"kind": "povm_list", "dims": [d, d], "povms": [[encode_matrix(e) for e in p] for p in povms]}


def table_doc(table):
    p = table.p if isinstance(table, CorrelationTable) else np.asarray(table)
    return {"kind": "table", "shape": list(p.shape), "p": p.tolist()}


def tabulation_doc(tab):
    return {
        "kind": "table",
        "shape": list(tab.T.shape),
        "p": tab.T.tolist(),
        "frames": {
            "alice": [encode_matrix(e) for e in tab.ic_a],
            "bob": [encode_matrix(e) for e in tab.ic_b],
        },
    }


def simulation_doc(sim):
    units = sim.decomposition.Wtilde.units
    return {
        "kind": "simulation",
        "dims": [sim.d, sim.d],
        "sigma": encode_matrix(sim.sigma),
        "psi": encode_vector(sim.psi),
        "M": encode_matrix(sim.M),
        "epsilon": float(sim.epsilon),
        "wtilde_units": np.stack([units.real, units.imag], axis=-1).tolist(),
    }


def dumps(doc):
    return json.dumps(doc, allow_nan=False) + "\n"


def save(doc, path):
    """Write atomically: temp file in the target directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".poptq-", suffix=".json", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(dumps(doc))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
