import stat
import sys

import pytest

from qlayout.arch import build_line
from qlayout.encode import EncodingOptions, build
from qlayout.solution import decode, verify
from qlayout.solve.backends import Backend, BackendError, check, default_command, parse_model


def _fake_solver(tmp_path, body: str):
    path = tmp_path / "fake_solver.py"
    path.write_text(f"import sys, time\nsys.stdin.read()\n{body}\n")
    return (sys.executable, str(path))


def test_parse_model_formats():
    text = """(
      (define-fun pi_q0_t0 () Int 3)
      (define-fun pi_q1_t0 () Int (- 2))
      (define-fun a_e0_t0 () Bool true)
      (define-fun |s_e0_t0| () Bool false)
      (define-fun f ((x Int)) Int x)
    )"""
    assert parse_model(text) == {"pi_q0_t0": 3, "pi_q1_t0": -2, "a_e0_t0": True, "s_e0_t0": False}
    assert parse_model("(model (define-fun x () Int 1))") == {"x": 1}
    with pytest.raises(BackendError):
        parse_model("((define-fun x () Int 1)")
    with pytest.raises(BackendError):
        parse_model("((define-fun x () Real 1.5))")


def test_env_command(monkeypatch):
    monkeypatch.setenv("QLAYOUT_SOLVER", "mysolver --flag 'a b'")
    assert default_command() == ("mysolver", "--flag", "a b")
    monkeypatch.delenv("QLAYOUT_SOLVER")
    assert default_command()[0] == "z3"


def test_unknown_backend_kind():
    with pytest.raises(ValueError):
        Backend(kind="cloud")


def test_z3_one_gate(z3, one_gate):
    cs = build(one_gate, build_line(2), EncodingOptions(1))
    out = check(cs, z3)
    assert out.status == "sat"
    s = decode(out.model, cs.vars)
    assert (s.depth, s.swap_count) == (1, 0)


def test_z3_unsat_with_no_model(z3, triangle):
    out = check(build(triangle, build_line(3), EncodingOptions(2)), z3)
    assert out.status == "unsat" and out.model is None


def test_internal_backend_matches(internal, triangle):
    g = build_line(3)
    assert check(build(triangle, g, EncodingOptions(2)), internal).status == "unsat"
    cs = build(triangle, g, EncodingOptions(4))
    out = check(cs, internal)
    verify(triangle, g, decode(out.model, cs.vars))


def test_timeout_status(tmp_path, one_gate):
    b = Backend(command=_fake_solver(tmp_path, "time.sleep(5)"), timeout=0.5)
    out = check(build(one_gate, build_line(2), EncodingOptions(1)), b)
    assert out.status == "timeout" and out.model is None


def test_unknown_is_a_timeout(tmp_path, one_gate):
    b = Backend(command=_fake_solver(tmp_path, "print('unknown')"))
    assert check(build(one_gate, build_line(2), EncodingOptions(1)), b).status == "timeout"


def test_garbage_output(tmp_path, one_gate):
    b = Backend(command=_fake_solver(tmp_path, "print('segfault')"))
    with pytest.raises(BackendError, match="unexpected"):
        check(build(one_gate, build_line(2), EncodingOptions(1)), b)


def test_missing_executable(one_gate):
    with pytest.raises(BackendError, match="cannot launch"):
        check(build(one_gate, build_line(2), EncodingOptions(1)), Backend(command=("no-such-solver-xyz",)))
