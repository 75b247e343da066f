"""Acceptance gate: every criterion prints one PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the lines; any FAIL
is also a test failure.
"""

import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

import numpy as np
import pytest
from PIL import Image
from scipy.stats import gennorm, norm

from brisque_oracle import oracle_features
from conftest import REFERENCE_IMAGES, make_dataset
from morphqual.brisque import default_model, features, fit_aggd, fit_ggd, mscn, score
from morphqual.cli import main
from morphqual.core import (
    EstimatorDescriptor,
    EstimatorFamily,
    EstimatorRegistry,
    Label,
    MadPolarity,
    NativeOrder,
    ScoreTable,
    default_registry,
    summarize,
)
from morphqual.ingest import load_image
from morphqual.madeval import acer, bpcer, cross_eval, eer, intra_eval, threshold_at_bpcer
from morphqual.stats import fdr, kde, overlap_ratio
from morphqual.synth import Population, SynthSpec, generate


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE FAIL: {name}")
        raise
    print(f"ACCEPTANCE PASS: {name}")


def test_fdr_oracle(magface):
    with criterion("FDR oracle: N(1,sqrt(.5)) vs N(0,sqrt(.5)), n=1e5 -> 1.00 +/- 0.03, < 1 s"):
        spec = SynthSpec("fdr", (
            Population(Label.BONA_FIDE, "normal", (0.0, math.sqrt(0.5)), 10**5),
            Population(Label.ATTACK, "normal", (1.0, math.sqrt(0.5)), 10**5, "m"),
        ), 101)
        manifest, table = generate(spec, magface)
        start = time.perf_counter()
        bona = summarize([table.entries[s] for s in manifest.bona_fide_ids()])
        attack = summarize([table.entries[s] for s in manifest.attack_ids("m")])
        value = fdr(attack, bona)
        elapsed = time.perf_counter() - start
        assert abs(value - 1.0) <= 0.03
        assert elapsed < 1.0


def test_eer_oracle(rng):
    with criterion("EER oracle: bona N(2,1) vs attack N(0,1), n=1e5 -> 0.1587 +/- 0.005, < 2 s"):
        bona = rng.normal(2.0, 1.0, 10**5)
        attack = rng.normal(0.0, 1.0, 10**5)
        start = time.perf_counter()
        rate, _ = eer(bona, attack)
        elapsed = time.perf_counter() - start
        assert abs(rate - norm.cdf(-1.0)) <= 0.005
        assert elapsed < 2.0


def test_acer_identity(rng):
    with criterion("ACER identity: 1000 random pairs, exact arithmetic mean"):
        for _ in range(1000):
            a, b = rng.uniform(0, 1), rng.uniform(0, 1)
            expected = (a + b) / 2.0
            got = acer(a, b)
            assert got == expected or abs(got - expected) <= math.ulp(expected)


def test_threshold_self_consistency(rng):
    with criterion("Threshold self-consistency: achieved BPCER exact, tight against target"):
        for _ in range(50):
            n = int(rng.integers(10, 2000))
            scores = rng.normal(rng.uniform(-3, 3), rng.uniform(0.1, 3), n)
            target = float(rng.uniform(0.02, 0.6))
            t = threshold_at_bpcer(scores, target)
            assert bpcer(scores, t) == t.achieved_bpcer
            assert t.achieved_bpcer <= target
            assert t.achieved_bpcer + 1.0 / n > target


def test_polarity_invariance(rng):
    with criterion("Polarity invariance: negated scores + flipped polarity, bit-identical report"):
        base = default_registry()
        desc = base.get("magface")
        # 6 populations: 2 datasets x (bona fide + 2 attacks)
        fixtures = []
        for name in ("d1", "d2"):
            fixtures.append(make_dataset(
                name, rng.normal(2, 1, 300),
                {"opencv": rng.normal(0, 1, 150), "stylegan2": rng.normal(1, 1, 150)},
                desc))
        manifests = [m for m, _ in fixtures]
        merged = ScoreTable(desc, {sid: v for _, t in fixtures
                                   for sid, v in t.entries.items()})

        flipped_reg = EstimatorRegistry()
        flipped_reg.register(desc.flipped())
        negated = ScoreTable(desc.flipped(),
                             {sid: -v for sid, v in merged.entries.items()})

        direct = cross_eval(manifests, [merged], base, 0.2)
        mirrored = cross_eval(manifests, [negated], flipped_reg, 0.2)
        assert direct == mirrored
        direct_intra = intra_eval(manifests, [merged], base)
        mirrored_intra = intra_eval(manifests, [negated], flipped_reg)
        assert direct_intra == mirrored_intra


def test_monotone_transform_invariance(rng, magface):
    with criterion("Monotone-transform invariance: x^3 + 2x changes no EER/APCER/BPCER"):
        # 4 populations: 2 datasets x (bona fide + attack)
        f = lambda x: x**3 + 2 * x
        plain, mapped = [], []
        for name in ("d1", "d2"):
            bona = rng.normal(2, 1, 200)
            attack = rng.normal(0, 1, 120)
            plain.append(make_dataset(name, bona, {"a": attack}, magface))
            mapped.append(make_dataset(name, f(bona), {"a": f(attack)}, magface))
        reg = default_registry()

        def merge(fixtures):
            manifests = [m for m, _ in fixtures]
            table = ScoreTable(magface, {sid: v for _, t in fixtures
                                         for sid, v in t.entries.items()})
            return manifests, [table]

        before = cross_eval(*merge(plain), reg, 0.2)
        after = cross_eval(*merge(mapped), reg, 0.2)
        for r1, r2 in zip(before.rows, after.rows):
            assert (r1.apcer, r1.bpcer, r1.acer) == (r2.apcer, r2.bpcer, r2.acer)
        eer_before = intra_eval(*merge(plain), reg)
        eer_after = intra_eval(*merge(mapped), reg)
        for r1, r2 in zip(eer_before.rows, eer_after.rows):
            assert r1.eer == r2.eer


def test_ggd_aggd_recovery():
    with criterion("GGD/AGGD recovery: alpha in {0.5,1,2,4} within 0.05; |eta| < 0.02"):
        rng = np.random.default_rng(314159)
        for alpha in (0.5, 1.0, 2.0, 4.0):
            draws = gennorm.rvs(alpha, size=10**6, random_state=rng)
            assert abs(fit_ggd(draws).alpha - alpha) <= 0.05
        symmetric = rng.standard_normal(10**6)
        assert abs(fit_aggd(symmetric).eta) < 0.02


def test_brisque_oracle():
    with criterion("BRISQUE oracle: 36 features vs independent implementation; "
                   "zero MSCN on constant; 1000 images < 30 s, thread invariant"):
        assert len(REFERENCE_IMAGES) == 5
        for path in REFERENCE_IMAGES:
            px = load_image(path).pixels
            got, want = features(px), oracle_features(px)
            assert np.allclose(got, want, rtol=1e-3, atol=1e-4), path.name

        assert np.abs(mscn(np.full((16, 16), 0.5))).max() < 1e-12

        model = default_model()
        rng = np.random.default_rng(0)
        seeds = rng.integers(0, 2**32, size=1000)
        start = time.perf_counter()
        for s in seeds:
            img = np.random.default_rng(s).random((224, 224))
            score(img, model)
        elapsed = time.perf_counter() - start
        assert elapsed < 30.0, f"scoring took {elapsed:.1f}s"

        def run(workers):
            images = [np.random.default_rng(s).random((224, 224)) for s in seeds[:64]]
            with ThreadPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(lambda im: score(im, model), images))

        assert run(1) == run(4)


def test_brisque_ordering():
    with criterion("BRISQUE ordering: JPEG q10 scores worse than original, 5/5"):
        model = default_model()
        hits = 0
        for path in REFERENCE_IMAGES:
            img = load_image(path)
            buf = io.BytesIO()
            Image.fromarray((img.pixels * 255).round().astype(np.uint8), "L").save(
                buf, format="JPEG", quality=10)
            buf.seek(0)
            degraded = np.asarray(Image.open(buf), dtype=np.float64) / 255.0
            hits += score(degraded, model) > score(img.pixels, model)
        assert hits == 5


def test_overlap_oracle():
    with criterion("Overlap oracle: independent rankings mean 0.10 +/- 0.02; identical -> 1.0"):
        desc = EstimatorDescriptor("magface", EstimatorFamily.FIQA,
                                   NativeOrder.INCREASING, MadPolarity.BONA_FIDE_HIGH)
        n = 10**4
        ratios = []
        for seed in range(100):
            r = np.random.default_rng(seed)
            a = ScoreTable(desc, {f"s{i}": float(v)
                                  for i, v in enumerate(r.permutation(n))})
            b = ScoreTable(desc, {f"s{i}": float(v)
                                  for i, v in enumerate(r.permutation(n))})
            ratios.append(overlap_ratio(a, b, 0.1))
        assert abs(float(np.mean(ratios)) - 0.10) <= 0.02
        same = ScoreTable(desc, {f"s{i}": float(i) for i in range(100)})
        assert overlap_ratio(same, same, 0.1) == 1.0


def test_kde_normalization(rng):
    with criterion("KDE normalization: integral in [0.98, 1.02] x20; normal peak within 5%"):
        for _ in range(20):
            kind = rng.integers(3)
            n = int(rng.integers(100, 5000))
            if kind == 0:
                x = rng.normal(rng.uniform(-10, 10), rng.uniform(0.1, 5), n)
            elif kind == 1:
                x = rng.uniform(-5, 5, n)
            else:
                x = rng.laplace(0, rng.uniform(0.2, 2), n)
            assert 0.98 <= kde(x).integral() <= 1.02
        peak = float(kde(rng.standard_normal(10**5), 1024).density.max())
        target = 1.0 / math.sqrt(2 * math.pi)
        assert abs(peak - target) / target < 0.05


def test_end_to_end_pipeline(tmp_path):
    with criterion("End-to-end: synth -> all analytics, exit 0, idempotent, "
                   "BPCER diagonal ~ 0.2"):
        spec = {
            "seed": 2024,
            "estimators": ["magface", "cnniqa"],
            "datasets": [
                {"name": f"ds{k}", "populations": [
                    {"label": "bonafide", "distribution": "normal",
                     "params": [2.0, 1.0], "count": 500},
                    {"label": "attack", "attack_type": "opencv",
                     "distribution": "normal", "params": [0.0, 1.0], "count": 250},
                    {"label": "attack", "attack_type": "stylegan2",
                     "distribution": "normal", "params": [0.7, 1.2], "count": 250},
                ]} for k in range(3)
            ],
        }
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(spec))
        fixture = tmp_path / "fixture"
        assert main(["synth", "--spec", str(spec_path), "--out", str(fixture)]) == 0

        args = []
        for m in sorted(fixture.glob("*.manifest.csv")):
            args += ["--manifest", str(m)]
        args += ["--scores", str(fixture / "scores.csv")]

        for cmd in ("separability", "eer", "crosseval", "overlap", "distributions"):
            assert main([cmd, *args, "--out", str(tmp_path / cmd)]) == 0

        out = tmp_path / "crosseval"
        first = {p.name: p.read_bytes() for p in out.iterdir()}
        assert main(["crosseval", *args, "--out", str(out)]) == 0
        second = {p.name: p.read_bytes() for p in out.iterdir()}
        assert first == second

        rows = [l.split(",") for l in (out / "bpcer_wide.csv").read_text().splitlines()
                if not l.startswith("#")]
        header = rows[0]
        for row in rows[1:]:
            diag = float(row[header.index(row[1])])
            assert abs(diag - 0.2) <= 1.0 / 500 + 1e-12
