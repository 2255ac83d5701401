"""Smoke test for the pyfullcorr extension module.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml -o dist && pip install dist/pyfullcorr-*.whl
"""

import json
import math

import pyfullcorr as fc


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    chsh = fc.BellExpression(2, 2, 2)
    assert chsh.scenario.n == 2 and chsh.scenario.k == 2
    assert fc.local_bound(chsh).exact == 1
    assert fc.evaluate(chsh, fc.Behavior.pr_box()) == 0.0
    uniform = fc.Behavior.uniform(fc.Scenario(2, 2, 2))
    assert fc.evaluate(chsh, uniform) == 2.0

    assert fc.local_bound(fc.BellExpression(2, 3, 4)).exact == 3
    assert fc.svetlichny_bound(fc.BellExpression(3, 2, 3)).exact == 4

    q = 2 - math.sqrt(2)
    assert close(fc.tsirelson_bound_binary(2, 2), q)
    assert close(fc.diew_bound_binary(3, 3, [1.0, 1.0, 0.0]), 3 * (3 - math.sqrt(3)))
    assert close(fc.lemma1_max(5, 2), 5.0)

    report = fc.optimize_phases(fc.BellExpression(3, 3, 2), seed=7, restarts=20)
    assert close(report.value, 9 * (1 - math.cos(math.pi / 6)), 1e-6)
    assert report.gap is not None and abs(report.gap) < 1e-6
    value = fc.quantum_value(fc.BellExpression(2, 2, 2), [[0.0, math.pi / 2], [-math.pi / 4, math.pi / 4]])
    assert close(value.value, q)
    assert fc.ghz_behavior(report.angles).is_no_signaling()

    value, verdicts = fc.classify(chsh, fc.Behavior.pr_box(), fc.known_bounds(chsh.scenario))
    assert value == 0.0
    assert [(kind, violated) for kind, _, violated, _ in verdicts] == [("local", True), ("tsirelson", True)]

    weights, constant = fc.BellExpression.mabk(3).correlator_weights()
    assert [w != 0 for w in weights] == [True, False, False, True, False, True, True, False]

    assert fc.bkp_matches(3, 3) and fc.svetlichny_cglmp_matches(3, 2)

    text = chsh.to_json()
    assert fc.BellExpression.from_json(text) == chsh
    assert json.loads(text)["f"] == [[0.0, 1.0], [0.0, 1.0]]

    try:
        fc.Scenario(1, 2, 2)
    except fc.FullcorrError:
        pass
    else:
        raise AssertionError("n = 1 accepted")
    try:
        fc.local_bound(fc.BellExpression(8, 4, 4))
    except fc.GuardError:
        pass
    else:
        raise AssertionError("guard not enforced")

    print("smoke test passed")


if __name__ == "__main__":
    main()
