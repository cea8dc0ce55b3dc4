import io
import os
from contextlib import redirect_stdout, redirect_stderr

import pytest

from jetcat.dsl import parse_system
from jetcat.jets import JetSpaceDescriptor
from jetcat.pde import PdeSystem
from jetcat.poly import Polynomial

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CORPUS = os.path.join(REPO, "corpus")
GOLDEN = os.path.join(CORPUS, "golden")

# Golden CLI invocations: name -> argv.  Regenerate with
#   python tests/regen_golden.py
GOLDEN_COMMANDS = {
    "check_heat": ["check", "corpus/heat.pde", "--to", "6", "--json"],
    "check_curl_bad": ["check", "corpus/curl_bad.pde", "--to", "2", "--json"],
    "check_exact": ["check", "corpus/exact.pde", "--to", "3", "--json"],
    "check_wave": ["check", "corpus/wave.pde", "--to", "6", "--json"],
    "check_ode": ["check", "corpus/ode.pde", "--to", "4", "--json"],
    "check_zero_order": ["check", "corpus/zero_order.pde", "--to", "2", "--json"],
    "check_burgers": ["check", "corpus/burgers.pde", "--to", "3", "--json"],
    "prolong_heat": ["prolong", "corpus/heat.pde", "--to", "3", "--json"],
    "compose_heat": ["compose", "corpus/heat.pde", "--ops", "ddx", "adv", "--json"],
    "jet_heat": ["jet", "corpus/heat.pde", "--section", "parabola",
                 "--order", "2", "--at", "1,0", "--json"],
    "solve_heat": ["solve", "corpus/heat.pde", "--seed", "u=0,u_x=0,u_xx=2@0,0",
                   "--to", "4", "--json"],
    "solve_curl_bad": ["solve", "corpus/curl_bad.pde", "--seed", "u=0@0,0",
                       "--to", "2", "--json"],
    "laws_heat": ["laws", "corpus/heat.pde", "--samples", "100", "--seed", "7",
                  "--to", "4", "--json"],
    "laws_ode": ["laws", "corpus/ode.pde", "--samples", "20", "--seed", "7",
                 "--to", "4", "--json"],
    "product_heat_decay": ["product", "corpus/heat.pde", "corpus/decay.pde", "--json"],
    "equalizer_heat": ["equalizer", "corpus/heat.pde", "--ops", "ddt", "lap",
                       "--to", "3", "--json"],
}


def run_cli(argv, cwd=REPO):
    """Run the CLI in-process; returns (exit_code, stdout, stderr)."""
    from jetcat.cli import main

    old = os.getcwd()
    out, err = io.StringIO(), io.StringIO()
    os.chdir(cwd)
    try:
        with redirect_stdout(out), redirect_stderr(err):
            code = main(list(argv))
    finally:
        os.chdir(old)
    return code, out.getvalue(), err.getvalue()


def corpus_file(name):
    return os.path.join(CORPUS, name)


def load_corpus(name):
    with open(corpus_file(name), "r", encoding="utf-8") as fh:
        return parse_system(fh.read(), os.path.splitext(name)[0])


@pytest.fixture
def heat_file():
    return load_corpus("heat.pde")


@pytest.fixture
def heat_system(heat_file):
    return heat_file.system()


@pytest.fixture
def heat_space():
    return JetSpaceDescriptor(("x", "t"), ("u",), 2)


@pytest.fixture
def ode_system():
    space = JetSpaceDescriptor(("x",), ("u",), 1)
    return PdeSystem(
        space, [Polynomial.jet_var(0, (1,)) - Polynomial.jet_var(0, (0,))]
    )
