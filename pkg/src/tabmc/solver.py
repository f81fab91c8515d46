"""Run external SMT-LIB2 solvers as child processes and read back their models."""

from __future__ import annotations

import enum
import logging
import os
import shutil
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from . import terms as T

log = logging.getLogger(__name__)

__all__ = ["Verdict", "SolverConfig", "SolverResult", "SolverError", "solve",
           "parse_model", "parse_sexprs", "check_model", "solver_family", "inject_seed"]


class SolverError(RuntimeError):
    pass


class Verdict(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"
    TIMEOUT = "timeout"


def _default_executable() -> str:
    return os.environ.get("TABMC_SOLVER", "z3")


@dataclass(frozen=True)
class SolverConfig:
    executable: str = field(default_factory=_default_executable)
    args: tuple = ()
    timeout: float = 120.0
    seeds: tuple = (1, 2)
    input_mode: str = "auto"    # "stdin", "file" or "auto" (by solver family)

    def __post_init__(self):
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.input_mode not in ("auto", "stdin", "file"):
            raise ValueError(f"unknown input mode {self.input_mode!r}")


@dataclass
class SolverResult:
    verdict: Verdict
    model: Optional[dict] = None
    seed: Optional[int] = None
    elapsed: float = 0.0
    raw: str = ""


def solver_family(executable: str) -> str:
    base = os.path.basename(executable).lower()
    if "z3" in base:
        return "z3"
    if "cvc5" in base:
        return "cvc5"
    return "generic"


def inject_seed(script_text: str, family: str, seed: int) -> str:
    if family == "z3":
        return f"(set-option :random-seed {seed})\n(set-option :smt.random_seed {seed})\n" + script_text
    if family == "cvc5":
        # cvc5 refuses (get-model) unless asked up front
        models = "" if ":produce-models" in script_text else "(set-option :produce-models true)\n"
        return f"(set-option :seed {seed})\n" + models + script_text
    return script_text


def _command(cfg: SolverConfig, family: str, path: Optional[str]) -> list:
    exe = shutil.which(cfg.executable) or (cfg.executable if os.path.isfile(cfg.executable) else None)
    if exe is None:
        raise SolverError(f"solver executable not found: {cfg.executable!r}")
    cmd = [exe, *cfg.args]
    if path is not None:
        return cmd + [path]
    if family == "z3":
        return cmd + ["-in", "-smt2"]
    if family == "cvc5":
        return cmd + ["--lang=smt2"]
    return cmd


class _Race:
    """Shared state of concurrently running solver processes."""

    def __init__(self):
        self.lock = threading.Lock()
        self.done = threading.Event()
        self.winner: Optional[SolverResult] = None
        self.results: list = []
        self.procs: list = []

    def offer(self, result):
        with self.lock:
            self.results.append(result)
            if self.winner is None and isinstance(result, SolverResult) \
                    and result.verdict in (Verdict.SAT, Verdict.UNSAT):
                self.winner = result
                self.done.set()


def _first_line(text: str) -> str:
    for line in text.splitlines():
        if line.strip():
            return line.strip()
    return ""


def _run_one(cmd, text, seed, race: _Race, declarations, known, started, tmpdir, use_file):
    try:
        stdin_data = text
        if use_file:
            path = os.path.join(tmpdir, f"query_{seed}.smt2")
            with open(path, "w") as fh:
                fh.write(text)
            cmd = cmd + [path]
            stdin_data = None
        proc = subprocess.Popen(cmd, stdin=subprocess.PIPE if stdin_data is not None else subprocess.DEVNULL,
                                stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
        with race.lock:
            race.procs.append(proc)
            if race.done.is_set():
                proc.kill()
        out, err = proc.communicate(stdin_data)
        elapsed = time.monotonic() - started
        if race.done.is_set() and race.winner is not None:
            race.offer(None)
            return
        head = _first_line(out)
        if head in ("sat", "unsat", "unknown"):
            verdict = Verdict(head)
            model = None
            if verdict is Verdict.SAT:
                body = out.split(head, 1)[1]
                model = parse_model(body, declarations, known)
            race.offer(SolverResult(verdict, model, seed, elapsed, out))
        elif head.startswith("(error") or proc.returncode not in (0, None):
            race.offer(SolverError(f"solver failed (exit {proc.returncode}): "
                                   f"{(head or err.strip())[:500]}"))
        else:
            race.offer(SolverError(f"malformed solver output: {out[:200]!r} {err[:200]!r}"))
    except SolverError as exc:
        race.offer(exc)
    except Exception as exc:  # pragma: no cover - defensive
        race.offer(SolverError(f"solver run failed: {exc}"))


def solve(script_text: str, cfg: SolverConfig = None, declarations: Optional[dict] = None,
          known: Iterable = ()) -> SolverResult:
    """Race one solver process per seed; the first sat/unsat answer wins.

    ``declarations`` maps declared names to sorts; it is needed to type the
    model on SAT (absent names are reported as an error); ``known`` lists
    further names the model may mention, such as defined functions.
    """
    known = frozenset(known)
    cfg = cfg or SolverConfig()
    declarations = declarations or {}
    family = solver_family(cfg.executable)
    use_file = cfg.input_mode == "file" or (cfg.input_mode == "auto" and family == "generic")
    seeds = list(cfg.seeds) if family != "generic" else list(cfg.seeds)[:1]
    cmd = _command(cfg, family, None)
    if use_file and family != "generic":
        cmd = [c for c in cmd if c not in ("-in", "--lang=smt2")]
    body = script_text.rstrip() + "\n"
    if "(get-model)" not in body:
        body += "(get-model)\n"
    race = _Race()
    started = time.monotonic()
    with tempfile.TemporaryDirectory(prefix="tabmc-") as tmpdir:
        threads = [threading.Thread(target=_run_one, daemon=True,
                                    args=(cmd, inject_seed(body, family, s), s, race,
                                          declarations, known, started, tmpdir, use_file))
                   for s in seeds]
        for th in threads:
            th.start()
        deadline = started + cfg.timeout
        while not race.done.is_set():
            if all(not th.is_alive() for th in threads):
                break
            if time.monotonic() >= deadline:
                break
            race.done.wait(0.02)
        race.done.set()
        with race.lock:
            procs = list(race.procs)
        for p in procs:
            if p.poll() is None:
                p.kill()
        for th in threads:
            th.join()
        for p in procs:
            p.wait()
    elapsed = time.monotonic() - started
    if race.winner is not None:
        race.winner.elapsed = elapsed
        return race.winner
    results = [r for r in race.results if r is not None]
    errors = [r for r in results if isinstance(r, SolverError)]
    answers = [r for r in results if isinstance(r, SolverResult)]
    if answers:
        return SolverResult(Verdict.UNKNOWN, None, answers[0].seed, elapsed, answers[0].raw)
    if elapsed >= cfg.timeout or len(results) < len(seeds):
        return SolverResult(Verdict.TIMEOUT, None, None, elapsed)
    if errors:
        raise errors[0]
    return SolverResult(Verdict.UNKNOWN, None, None, elapsed)


# -- s-expressions and models -------------------------------------------------

def parse_sexprs(text: str) -> list:
    """Parse a sequence of s-expressions into nested lists of atom strings."""
    stack, cur = [], []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c == "(":
            stack.append(cur)
            cur = []
            i += 1
        elif c == ")":
            if not stack:
                raise SolverError("unbalanced ')' in solver output")
            done, cur = cur, stack.pop()
            cur.append(done)
            i += 1
        elif c == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise SolverError("unterminated quoted symbol in solver output")
            cur.append(text[i + 1:j])
            i = j + 1
        elif c == '"':
            j = i + 1
            while j < n and not (text[j] == '"' and (j + 1 >= n or text[j + 1] != '"')):
                j += 2 if text[j] == '"' else 1
            cur.append(text[i:j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            cur.append(text[i:j])
            i = j
    if stack:
        raise SolverError("unbalanced '(' in solver output")
    return cur


def _real_value(v) -> Fraction:
    if isinstance(v, str):
        try:
            return Fraction(v)
        except ValueError:
            raise SolverError(f"cannot read real value {v!r}") from None
    if len(v) == 2 and v[0] == "-":
        return -_real_value(v[1])
    if len(v) == 3 and v[0] == "/":
        return _real_value(v[1]) / _real_value(v[2])
    raise SolverError(f"cannot read real value {v!r}")


def _bv_value(v, width: int) -> int:
    if isinstance(v, str):
        if v.startswith("#b"):
            return int(v[2:], 2)
        if v.startswith("#x"):
            return int(v[2:], 16)
    elif len(v) == 3 and v[0] == "_" and isinstance(v[1], str) and v[1].startswith("bv"):
        return int(v[1][2:]) % (1 << width)
    raise SolverError(f"cannot read bit-vector value {v!r}")


def parse_model(text: str, declarations: dict, known: Iterable = ()) -> dict:
    """Map declared names to values: ints for bit-vectors, Fractions for reals, bools.

    Entries for names in ``known`` (e.g. defined helper functions) are skipped
    silently; other undeclared entries are skipped with a warning.
    """
    known = set(known)
    items = parse_sexprs(text)
    # z3 wraps definitions in (model ...); cvc5 prints them in a bare list
    defs = []
    for item in items:
        if isinstance(item, list):
            body = item[1:] if item and item[0] == "model" else item
            defs.extend(d for d in body if isinstance(d, list) and d and d[0] == "define-fun")
            if item and item[0] == "error":
                raise SolverError(f"solver error: {' '.join(map(str, item[1:]))}")
    model = {}
    for d in defs:
        if len(d) != 5:
            raise SolverError(f"malformed define-fun {d!r}")
        _, name, params, _sort, value = d
        if params:
            continue
        sort = declarations.get(name)
        if sort is None:
            if name in known:
                continue
            log.warning("ignoring undeclared model entry %s", name)
            continue
        if sort.kind == "bv":
            model[name] = _bv_value(value, sort.width)
        elif sort.kind == "real":
            model[name] = _real_value(value)
        elif sort.kind == "bool":
            if value not in ("true", "false"):
                raise SolverError(f"cannot read boolean value {value!r}")
            model[name] = value == "true"
    missing = sorted(set(declarations) - set(model))
    if missing:
        raise SolverError(f"model lacks values for: {', '.join(missing[:10])}"
                          + (" ..." if len(missing) > 10 else ""))
    return model


def check_model(script: T.Script, model: dict, threshold: int = 20000) -> list:
    """Indices of assertions that the model falsifies (skipped above ``threshold`` assertions)."""
    if len(script.assertions) > threshold:
        return []
    cache = {}
    return [i for i, a in enumerate(script.assertions)
            if T.evaluate(a, model, script.definitions, cache) is not True]
