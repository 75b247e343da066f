import numpy as np
import pytest
from PIL import Image

from morphqual.core import Label, default_registry
from morphqual.ingest import (
    CoverageBelowFloor,
    DuplicateSample,
    EmptyBonaFide,
    GrayImage,
    NonFiniteScore,
    ParseError,
    UnknownEstimator,
    UnsupportedFormat,
    dump_manifest,
    join,
    load_image,
    load_manifest,
    load_scores,
)

MANIFEST_HEADER = "sample_id,path,label,attack_type,dataset\n"


def write_manifest(tmp_path, rows, name="m.csv"):
    path = tmp_path / name
    path.write_text(MANIFEST_HEADER + "".join(r + "\n" for r in rows), encoding="utf-8")
    return path


class TestLoadManifest:
    def test_minimal(self, tmp_path):
        path = write_manifest(tmp_path, [
            "bf1,bf1.png,bonafide,,frll",
            "at1,at1.png,attack,opencv,frll",
        ])
        manifest, paths = load_manifest(path)
        assert manifest.dataset_name == "frll"
        assert manifest.attack_types == ("opencv",)
        assert paths["bf1"] == tmp_path / "bf1.png"

    def test_attack_without_type_rejected(self, tmp_path):
        path = write_manifest(tmp_path, [
            "bf1,bf1.png,bonafide,,frll",
            "at1,at1.png,attack,,frll",
        ])
        with pytest.raises(ParseError):
            load_manifest(path)

    def test_duplicate_sample_rejected(self, tmp_path):
        path = write_manifest(tmp_path, [
            "bf1,a.png,bonafide,,d",
            "bf1,b.png,bonafide,,d",
        ])
        with pytest.raises(DuplicateSample):
            load_manifest(path)

    def test_no_bonafide_rejected(self, tmp_path):
        path = write_manifest(tmp_path, ["a1,a.png,attack,opencv,d"])
        with pytest.raises(EmptyBonaFide):
            load_manifest(path)

    def test_label_case_insensitive(self, tmp_path):
        path = write_manifest(tmp_path, ["bf1,a.png,BonaFide,,d"])
        manifest, _ = load_manifest(path)
        assert manifest.samples[0].label is Label.BONA_FIDE

    def test_feret_morphs_shape(self, tmp_path):
        # 1413 bona fide plus 529 attacks per technique: totals 1942 each
        rows = [f"bf{i},bf{i}.png,bonafide,,feret" for i in range(1413)]
        for technique in ("facemorpher", "opencv", "stylegan2"):
            rows += [f"{technique}{i},{technique}{i}.png,attack,{technique},feret"
                     for i in range(529)]
        manifest, _ = load_manifest(write_manifest(tmp_path, rows))
        bona = len(manifest.bona_fide_ids())
        assert bona == 1413
        for technique in manifest.attack_types:
            assert bona + len(manifest.attack_ids(technique)) == 1942

    def test_round_trip(self, tmp_path):
        path = write_manifest(tmp_path, [
            "bf1,img/bf1.png,bonafide,,d",
            "at1,img/at1.png,attack,opencv,d",
        ])
        manifest, paths = load_manifest(path)
        rel = {sid: p.relative_to(tmp_path) for sid, p in paths.items()}
        out = tmp_path / "copy.csv"
        dump_manifest(manifest, rel, out)
        assert out.read_text() == path.read_text()


class TestLoadScores:
    def test_groups_by_estimator(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text(
            "estimator,sample_id,score\n"
            "magface,a,1.5\nmagface,b,2.5\nbrisque,a,30.0\n"
        )
        tables = load_scores(path, default_registry())
        assert [t.estimator.name for t in tables] == ["brisque", "magface"]
        assert tables[1].entries == {"a": 1.5, "b": 2.5}

    def test_unknown_estimator(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("estimator,sample_id,score\nwat,a,1.0\n")
        with pytest.raises(UnknownEstimator):
            load_scores(path, default_registry())

    def test_non_finite_score(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("estimator,sample_id,score\nmagface,a,nan\n")
        with pytest.raises(NonFiniteScore):
            load_scores(path, default_registry())

    def test_bad_header(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ParseError):
            load_scores(path, default_registry())


class TestLoadImage:
    def test_white_png(self, tmp_path):
        path = tmp_path / "w.png"
        Image.new("RGB", (2, 2), (255, 255, 255)).save(path)
        img = load_image(path)
        assert np.allclose(img.pixels, 1.0)
        assert (img.width, img.height) == (2, 2)

    def test_red_png_bt601(self, tmp_path):
        path = tmp_path / "r.png"
        Image.new("RGB", (2, 2), (255, 0, 0)).save(path)
        assert np.allclose(load_image(path).pixels, 0.299)

    def test_unsupported_format(self, tmp_path):
        path = tmp_path / "x.bmp"
        Image.new("RGB", (2, 2)).save(path, format="BMP")
        with pytest.raises(UnsupportedFormat):
            load_image(path)

    def test_matches_independent_decoder(self, tmp_path, rng):
        # cross-decoder oracle: reference BT.601 luma computed directly from
        # the stored RGB bytes
        arr = (rng.random((16, 16, 3)) * 255).astype(np.uint8)
        path = tmp_path / "ref.png"
        Image.fromarray(arr).save(path)
        expected = (arr @ np.array([0.299, 0.587, 0.114])) / 255.0
        assert np.abs(load_image(path).pixels - expected).max() <= 1.0 / 255.0


class TestGrayImage:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            GrayImage(np.full((2, 2), 1.5))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            GrayImage(np.full((2, 2), np.nan))


class TestJoin:
    def make(self, tmp_path):
        manifest, _ = load_manifest(write_manifest(tmp_path, [
            "bf1,a.png,bonafide,,d",
            "bf2,b.png,bonafide,,d",
            "at1,c.png,attack,opencv,d",
        ]))
        return manifest

    def test_partitions_three_sets(self, tmp_path, registry):
        from morphqual.core import ScoreTable
        manifest = self.make(tmp_path)
        table = ScoreTable(registry.get("magface"), {"bf1": 1.0, "at1": 2.0, "zz": 3.0})
        report = join(manifest, table, coverage_floor=0.5)
        assert report.matched == ("at1", "bf1")
        assert report.manifest_only == ("bf2",)
        assert report.score_only == ("zz",)
        assert report.coverage == pytest.approx(2 / 3)

    def test_strict_floor_raises(self, tmp_path, registry):
        from morphqual.core import ScoreTable
        manifest = self.make(tmp_path)
        table = ScoreTable(registry.get("magface"), {"bf1": 1.0})
        with pytest.raises(CoverageBelowFloor):
            join(manifest, table)

    def test_full_coverage_passes(self, tmp_path, registry):
        from morphqual.core import ScoreTable
        manifest = self.make(tmp_path)
        table = ScoreTable(registry.get("magface"), {"bf1": 1.0, "bf2": 2.0, "at1": 0.0})
        assert join(manifest, table).coverage == 1.0
