"""Acceptance suite: every exit criterion at its stated tolerance.

Each test prints one PASS line on success (run `pytest -s` or execute this
file directly for the per-criterion report).
"""

import math
import sys

import numpy as np
import pytest

from herop.cli import main as cli_main
from herop.conditions import (
    SignPattern,
    Verdict,
    banach_algebra_condition,
    generate_sign_pattern_kernel,
    reciprocal_summability_check,
    tau_condition_check,
)
from herop.ergodic import (
    MOVING_BASIS,
    OracleKind,
    cesaro1_norm_table,
    cesaro_probe,
    default_n_grid,
    shift_threshold_oracle,
    trichotomy_test,
)
from herop.model import build_model, bundle_direct_sum
from herop.operators import (
    BlockDiagOperator,
    DenseOperator,
    Direction,
    hereditary_apply,
    operator_norm,
    seeded_unit_vectors,
    shift_membership_backward,
    shift_section,
)
from herop.series import (
    Polynomial,
    PowSign,
    TruncatedSeries,
    binomial_series,
    cesaro_number_gamma,
    cesaro_numbers,
    invert_kernel,
    reciprocal,
)
from herop.specdsl import elaborate, parse_kernel_spec, pretty

try:
    from tests.test_specdsl import _corpus
except ImportError:  # standalone execution from inside tests/
    from test_specdsl import _corpus


def _report(index, text):
    print(f"ACCEPTANCE {index:>2}: PASS  {text}")


def poly(*coeffs):
    return TruncatedSeries(np.array(coeffs, dtype=float), Polynomial(len(coeffs) - 1))


def test_criterion_01_reciprocal_roundtrip():
    n = 4096
    five_one, _ = generate_sign_pattern_kernel(SignPattern.from_string("+-"), n)
    symbols = {
        "1-t": poly(1.0, -1.0),
        "(1-t)^2": poly(1.0, -2.0, 1.0),
        "(1-t)^0.5": binomial_series(0.5, PowSign.PLUS, n),
        "prescribed-signs": five_one.alpha,
    }
    worst = 0.0
    for name, alpha in symbols.items():
        pair = reciprocal(alpha, n) if name != "prescribed-signs" else five_one
        assert pair.inversion_residual <= 1e-10, (name, pair.inversion_residual)
        worst = max(worst, pair.inversion_residual)
    # the Fibonacci symbol grows past float range long before N = 4096; the
    # round-trip is exact on the largest integer-faithful window (F_78 is the
    # last Fibonacci number below 2^53) and backward-stable up to overflow
    exact = reciprocal(poly(1.0, -1.0, -1.0), 77)
    assert exact.inversion_residual == 0.0
    wide = reciprocal(poly(1.0, -1.0, -1.0), 1400)
    conv = np.convolve(wide.alpha.coeffs[:3], wide.k.coeffs)[:1401]
    conv[0] -= 1.0
    scale = np.convolve(np.abs(wide.alpha.coeffs[:3]), wide.k.coeffs)[:1401]
    scaled = float(np.max(np.abs(conv) / np.maximum(scale, 1.0)))
    assert scaled <= 1e-10
    _report(
        1,
        f"reciprocal round-trip at N={n}, worst residual {worst:.2e} <= 1e-10 "
        "(Fibonacci symbol: exact to N=77, backward-stable to overflow)",
    )


@pytest.mark.xfail(
    strict=True,
    reason="unattainable as stated: the Fibonacci kernel reaches 1e855 at "
    "n=4096, beyond 64-bit float range (overflow at n=1477); absolute "
    "residual 1e-10 is impossible past n=78 where integers exceed 2^53",
)
def test_criterion_01_fibonacci_at_full_window_unattainable():
    pair = reciprocal(poly(1.0, -1.0, -1.0), 4096)
    assert pair.inversion_residual <= 1e-10


def test_criterion_02_cesaro_numbers():
    n_max = 10_000
    worst = 0.0
    for a in (0.3, 0.5, 1.5, 2.0):
        values = cesaro_numbers(a, n_max)
        for n in range(1, n_max + 1, 111):
            ref = cesaro_number_gamma(a, n)
            rel = abs(values[n] - ref) / abs(ref)
            worst = max(worst, rel)
            assert rel <= 1e-10, (a, n, rel)
    for a in (0.1, 0.3, 0.5, 0.8, 1.0):
        values = cesaro_numbers(a, n_max)[1:]
        n = np.arange(1.0, n_max + 1.0)
        gamma_a = math.gamma(a)
        assert np.all((n + 1.0) ** (a - 1.0) / gamma_a <= values)
        assert np.all(values <= n ** (a - 1.0) / gamma_a)
    _report(2, f"Cesaro recurrence vs Gamma formula (worst rel {worst:.2e}) and sandwich bounds")


def test_criterion_03_membership_grid():
    grid = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0)
    n = 2000
    checked = 0
    for a in grid:
        alpha = binomial_series(a, PowSign.PLUS, n)
        for s in grid:
            kappa = binomial_series(s, PowSign.MINUS, n)
            report = shift_membership_backward(alpha, kappa)
            assert report.member == (a <= s), (a, s, report.min_coefficient)
            checked += 1
    _report(3, f"backward-shift membership equals (a <= s) on all {checked} grid points")


def test_criterion_04_power_norm_law():
    d = 512
    section = shift_section(binomial_series(0.5, PowSign.MINUS, d), Direction.BACKWARD, d)
    kappa = cesaro_numbers(0.5, 20)
    mat = section.operator().entries
    power = np.eye(d, dtype=complex)
    worst = 0.0
    for m in range(1, 21):
        power = power @ mat
        norm = float(np.linalg.svd(power, compute_uv=False)[0])
        expected = kappa[m] ** -0.5
        rel = abs(norm - expected) / expected
        worst = max(worst, rel)
        assert rel <= 1e-8, (m, rel)
    _report(4, f"section power norms match kappa_m^(-1/2) for m <= 20 (worst rel {worst:.2e})")


def test_criterion_05_model_roundtrip_prescribed_kernel():
    five_one, _ = generate_sign_pattern_kernel(SignPattern.from_string("+-"), 512)
    heads = ",".join(repr(float(v)) for v in five_one.k.coeffs[1:9])
    spec = f"tail(poly[1.0,{heads}],0.05,2.0,9)"
    k = elaborate(parse_kernel_spec(spec), 255)
    pair = invert_kernel(k)
    section = shift_section(k, Direction.BACKWARD, 64)
    bundle = build_model(pair.alpha, k, section)
    assert bundle.diagnostics["isometry_residual"] <= 1e-8
    assert bundle.diagnostics["intertwine_residual"] <= 1e-10
    identity_err = float(np.max(np.abs(bundle.V[:64, :64] - np.eye(64))))
    assert identity_err <= 1e-10
    hered = hereditary_apply(pair.alpha, section)
    projection = np.zeros((64, 64))
    projection[0, 0] = 1.0
    proj_err = float(np.max(np.abs(hered.value.entries - projection)))
    assert proj_err <= 1e-10
    _report(
        5,
        "prescribed-sign kernel section model: transform is the identity "
        f"(entrywise {identity_err:.2e}), projection identity {proj_err:.2e}",
    )


def test_criterion_06_np_explicit_model():
    n = 127
    alpha = binomial_series(0.5, PowSign.PLUS, n)
    k = binomial_series(0.5, PowSign.MINUS, n)
    section = shift_section(k, Direction.BACKWARD, 64)
    bundle = build_model(alpha, k, section)
    norm_v = float(np.linalg.norm(bundle.V, 2))
    assert norm_v <= 1.0 + 1e-8
    assert bundle.diagnostics["isometry_residual"] <= 1e-8
    assert bundle.diagnostics["sw_residual"] <= 1e-8
    w_norm = operator_norm(bundle.W)
    assert w_norm <= 1e-8  # critical shift part: the isometric summand is absent
    _report(
        6,
        f"explicit model at order 1/2: ||V|| = 1 + {max(0.0, norm_v - 1.0):.1e}, "
        f"||W|| = {w_norm:.1e}, all residuals <= 1e-8",
    )


def test_criterion_07_defect_relation():
    from herop.model import build_defect, verify_relation_DCW

    kc = (np.arange(0.0, 2049.0) + 1.0) ** -2
    pair = invert_kernel(TruncatedSeries(kc, None))
    rng = np.random.default_rng(17)
    unitary = DenseOperator(np.diag(np.exp(2j * np.pi * rng.random(8))))
    probes = seeded_unit_vectors(8, 100, seed=3)
    rel_unitary = verify_relation_DCW(
        pair.alpha, unitary, np.zeros((1, 8)), np.eye(8), probes
    )
    assert rel_unitary["residual"] <= 1e-10

    section = shift_section(pair.k, Direction.BACKWARD, 32)
    d_op, _, _ = build_defect(pair.alpha, section)
    rel_section = verify_relation_DCW(
        pair.alpha, section, d_op.entries, np.zeros((32, 32)), seeded_unit_vectors(32, 20, seed=5)
    )
    assert rel_section["residual"] <= 1e-8
    _report(
        7,
        f"defect relation: unitary residual {rel_unitary['residual']:.2e} <= 1e-10, "
        f"section residual {rel_section['residual']:.2e} <= 1e-8",
    )


def test_criterion_08_ergodic_thresholds():
    d = 4096
    grid = default_n_grid(4000)
    points = 0
    for s in (0.25, 0.5, 0.75):
        section = shift_section(binomial_series(s, PowSign.MINUS, d), Direction.BACKWARD, d)
        for a10 in range(1, 13):
            a = a10 / 10.0
            if abs(a - (1.0 - s)) < 0.1 - 1e-9:
                continue
            oracle = shift_threshold_oracle(s, a, None, OracleKind.QUADRATIC_MEANS)
            probe = cesaro_probe(section, MOVING_BASIS, a, 2.0, grid)
            assert probe.trends[0].bounded == oracle.bounded, (s, a, probe.trends[0])
            points += 1
        for q in (1.0, 1.5, 2.0):
            for b10 in range(1, 13):
                b = b10 / 10.0
                if abs(b - q * (1.0 - s) / 2.0) < 0.1 - 1e-9:
                    continue
                oracle = shift_threshold_oracle(s, b, q, OracleKind.GENERAL_MEANS)
                probe = cesaro_probe(section, MOVING_BASIS, b, q, grid)
                assert probe.trends[0].bounded == oracle.bounded, (s, b, q, probe.trends[0])
                points += 1
    rng = np.random.default_rng(4)
    unitary = DenseOperator(np.diag(np.exp(2j * np.pi * rng.random(6))))
    x = seeded_unit_vectors(6, 1, seed=6)[0]
    probe = cesaro_probe(unitary, x, 0.5, 2.0, default_n_grid(10_000))
    iso_dev = float(np.max(np.abs(probe.samples[0] - 1.0)))
    assert iso_dev <= 1e-12
    _report(
        8,
        f"trend/oracle agreement on {points} threshold grid points; "
        f"isometry identity deviation {iso_dev:.2e} <= 1e-12",
    )


def test_criterion_09_trichotomy():
    n_weights = 4096
    d_shift = 256
    alpha = binomial_series(0.5, PowSign.PLUS, n_weights)
    k = binomial_series(0.5, PowSign.MINUS, n_weights)
    section = shift_section(k, Direction.BACKWARD, d_shift)
    rng = np.random.default_rng(23)
    phases = 2.0 * np.pi * rng.random(2)
    unitary = DenseOperator(np.diag(np.exp(1j * phases)))
    b_shift = build_model(alpha, k, section)
    b_unit = build_model(alpha, k, unitary, M=n_weights)
    bundle, _ = bundle_direct_sum(b_shift, b_unit, section, unitary)
    block = BlockDiagOperator((section, unitary))

    vectors = seeded_unit_vectors(d_shift + 2, 20, seed=11)
    report = trichotomy_test(block, bundle, vectors, n_max=10_000)
    assert report["consistent"]

    x = np.zeros(d_shift + 2)
    x[:d_shift] = 1.0 / (np.arange(d_shift) + 1.0)
    norm_sq = float(np.dot(x, x))
    pure = trichotomy_test(block, bundle, [x], n_max=10_000)
    mean_value = pure["rows"][0]["cesaro_mean"]
    assert mean_value <= 0.05 * norm_sq
    assert all(pure["rows"][0]["indicators_absent"].values())
    _report(
        9,
        "trichotomy indicators consistent on 20 seeded vectors; pure-shift mean "
        f"{mean_value:.2e} <= 0.05 ||x||^2 = {0.05 * norm_sq:.2e}",
    )


def test_criterion_10_cesaro_bounded_not_power_bounded():
    assani = DenseOperator(np.array([[-1.0, 2.0], [0.0, -1.0]], dtype=complex))
    grid = sorted(set(range(1, 1025)) | set(default_n_grid(100_000, points=60)))
    table = cesaro1_norm_table(assani, grid)
    ns = sorted(table["mean_norms"])
    running = []
    sup = 0.0
    for n in ns:
        sup = max(sup, table["mean_norms"][n])
        running.append((n, sup))
    final_sup = running[-1][1]
    decade_ago = max(s for n, s in running if n <= ns[-1] / 10)
    assert math.isfinite(final_sup)
    assert final_sup - decade_ago <= 0.01 * final_sup
    n_last = ns[-1]
    power_ratio = table["power_norms"][n_last] / n_last
    assert abs(power_ratio - 2.0) <= 1e-6
    _report(
        10,
        f"order-1 mean norms stabilized at {final_sup:.6f} while "
        f"||T^n||/n = {power_ratio:.9f} at n = {n_last}",
    )


def test_criterion_11_sign_pattern_generator():
    for text in ("+-", "--", "+-+-+"):
        pattern = SignPattern.from_string(text)
        pair, report = generate_sign_pattern_kernel(pattern, 512)
        assert report.verdict is Verdict.HOLDS, (text, report.witness)
        assert report.witness["halvings"] <= 60
        assert np.all(pair.k.coeffs[1:] > 0.0)
        alpha = pair.alpha.coeffs
        assert alpha[1] < 0.0
        for pos, sign in zip(range(2, len(text) + 2), text):
            assert (alpha[pos] > 0.0) == (sign == "+"), (text, pos)
        assert pair.inversion_residual <= 1e-10
    _report(11, 'patterns "+-", "--", "+-+-+" generated within the halving budget')


def test_criterion_12_banach_chain():
    n = 8192
    quad = TruncatedSeries((np.arange(0.0, n + 1.0) + 1.0) ** 2, None)
    assert tau_condition_check(quad).verdict is Verdict.TREND_HOLDS
    assert banach_algebra_condition(quad).verdict is Verdict.TREND_HOLDS
    assert reciprocal_summability_check(quad).verdict is Verdict.TREND_HOLDS
    flat = TruncatedSeries(np.ones(2049), None)
    assert tau_condition_check(flat).verdict is Verdict.FAILS
    assert banach_algebra_condition(flat).verdict is Verdict.FAILS
    assert reciprocal_summability_check(flat).verdict is Verdict.FAILS
    _report(12, "quadratic weights pass the tau/algebra/summability chain, flat weights fail all")


def test_criterion_13_parser_and_cli_contract(tmp_path, capsys):
    corpus = _corpus(50)
    for node in corpus:
        text = pretty(node)
        assert parse_kernel_spec(text) == node
        assert pretty(parse_kernel_spec(text)) == text

    out_a = tmp_path / "a.json"
    out_b = tmp_path / "b.json"
    base = ["kernel", "check", "--spec", "pow1mt(0.5)", "-N", "512", "--seed", "3"]
    assert cli_main(base + ["--out", str(out_a)]) == 0
    assert cli_main(base + ["--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()

    malformed = [
        ["kernel", "check", "--spec", "pow1mt("],
        ["kernel", "check", "--spec", "poly[]"],
        ["kernel", "check", "--spec", "inv(poly[0,1])"],
        ["kernel", "check", "--spec", "pow1mt(0.5))"],
        ["kernel", "check", "--spec", "nonsense(1)"],
        ["kernel", "check"],  # missing --spec
        ["shift", "membership", "--spec", "pow1mt(0.5)"],  # missing weights
        ["ergodic", "probe", "--spec", "pow1mt(-0.5)"],  # missing --a
        ["model", "build", "--operator", "does-not-exist.csv"],
        ["example", "signs", "--pattern", "+z"],
    ]
    capsys.readouterr()
    for argv in malformed:
        assert cli_main(argv) == 3, argv
    capsys.readouterr()
    _report(13, "50-spec round-trip corpus, byte-identical reports, 10 malformed inputs exit 3")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-s", "-q"]))
