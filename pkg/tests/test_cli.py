import json

import numpy as np
import pytest

from psekit.cli import run
from psekit.formats import read_label_map, read_score_stack, write_annotation
from psekit.labelgen import Annotation, Region


@pytest.fixture
def workdir(tmp_path):
    ann = Annotation(64, 96, [
        Region(np.array([(8.0, 8.0), (44.0, 8.0), (44.0, 28.0), (8.0, 28.0)])),
        Region(np.array([(8.0, 36.0), (44.0, 36.0), (44.0, 56.0), (8.0, 56.0)])),
    ])
    ann_path = tmp_path / "ann.json"
    write_annotation(ann_path, ann)
    synth_spec = {
        "height": 64, "width": 96,
        "regions": [{"rect": [8, 8, 44, 28]}, {"rect": [8, 36, 44, 56]}],
        "kernels": 3, "min_scale": 0.5, "noise": 0.2, "seed": 9,
    }
    spec_path = tmp_path / "synth.json"
    spec_path.write_text(json.dumps(synth_spec))
    return tmp_path, ann_path, spec_path


class TestLabelgen:
    def test_writes_stack_with_ignore_plane(self, workdir):
        tmp, ann_path, _ = workdir
        out = tmp / "labels.pses"
        code = run(["labelgen", "--annotation", str(ann_path),
                    "--num-kernels", "5", "--min-scale", "0.6",
                    "--out", str(out)])
        assert code == 0
        stack = read_score_stack(out)
        assert stack.shape == (6, 64, 96)  # 5 kernel planes + ignore
        for i in range(4):  # nesting
            assert not ((stack[i] > 0) & ~(stack[i + 1] > 0)).any()

    def test_missing_file_exit_one(self, tmp_path, capsys):
        code = run(["labelgen", "--annotation", str(tmp_path / "nope.json"),
                    "--out", str(tmp_path / "x.pses")])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_empty_regions_ok(self, tmp_path):
        ann_path = tmp_path / "empty.json"
        ann_path.write_text(json.dumps({"height": 16, "width": 16, "regions": []}))
        out = tmp_path / "empty.pses"
        assert run(["labelgen", "--annotation", str(ann_path), "--out", str(out)]) == 0
        assert read_score_stack(out).sum() == 0


class TestSynthAndPse:
    def test_synth_deterministic(self, workdir):
        tmp, _, spec_path = workdir
        a, b = tmp / "a.pses", tmp / "b.pses"
        assert run(["synth", "--spec", str(spec_path), "--out", str(a)]) == 0
        assert run(["synth", "--spec", str(spec_path), "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_pse_detects_two_instances(self, workdir):
        tmp, _, spec_path = workdir
        scores = tmp / "scores.pses"
        run(["synth", "--spec", str(spec_path), "--out", str(scores)])
        dets_path = tmp / "dets.json"
        labels_path = tmp / "labels.psel"
        code = run(["pse", "--scores", str(scores), "--out", str(dets_path),
                    "--labels-out", str(labels_path)])
        assert code == 0
        data = json.loads(dets_path.read_text())
        assert len(data["detections"]) == 2
        labels = read_label_map(labels_path)
        assert labels.max() == 2

    def test_bad_threshold_exit_one(self, workdir, capsys):
        tmp, _, spec_path = workdir
        scores = tmp / "scores.pses"
        run(["synth", "--spec", str(spec_path), "--out", str(scores)])
        code = run(["pse", "--scores", str(scores), "--threshold", "1.1",
                    "--out", str(tmp / "d.json")])
        assert code == 1
        assert "threshold" in capsys.readouterr().err

    def test_scale_factor_scales_coordinates(self, workdir):
        tmp, _, spec_path = workdir
        scores = tmp / "scores.pses"
        run(["synth", "--spec", str(spec_path), "--out", str(scores)])
        one = tmp / "one.json"
        four = tmp / "four.json"
        run(["pse", "--scores", str(scores), "--out", str(one)])
        run(["pse", "--scores", str(scores), "--scale-factor", "4", "--out", str(four)])
        c1 = json.loads(one.read_text())["detections"][0]["rect"]["center"]
        c4 = json.loads(four.read_text())["detections"][0]["rect"]["center"]
        assert c4 == pytest.approx([4 * c1[0], 4 * c1[1]])

    def test_four_kernel_stack_gives_four_detections(self, tmp_path):
        spec = {
            "height": 64, "width": 124,
            "regions": [{"rect": [6, 6, 58, 26]}, {"rect": [66, 6, 118, 26]},
                        {"rect": [6, 38, 58, 58]}, {"rect": [66, 38, 118, 58]}],
            "kernels": 3, "min_scale": 0.4,
        }
        spec_path = tmp_path / "four.json"
        spec_path.write_text(json.dumps(spec))
        scores = tmp_path / "four.pses"
        dets = tmp_path / "four_dets.json"
        run(["synth", "--spec", str(spec_path), "--out", str(scores)])
        assert run(["pse", "--scores", str(scores), "--out", str(dets)]) == 0
        assert len(json.loads(dets.read_text())["detections"]) == 4

    def test_pipeline_deterministic(self, workdir):
        tmp, _, spec_path = workdir
        scores = tmp / "scores.pses"
        run(["synth", "--spec", str(spec_path), "--out", str(scores)])
        outs = []
        for name in ("d1.json", "d2.json"):
            path = tmp / name
            run(["pse", "--scores", str(scores), "--out", str(path)])
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]


class TestEval:
    def test_eval_pipeline(self, workdir, capsys):
        tmp, ann_path, spec_path = workdir
        scores = tmp / "scores.pses"
        run(["synth", "--spec", str(spec_path), "--out", str(scores)])
        dets = tmp / "dets.json"
        run(["pse", "--scores", str(scores), "--out", str(dets)])
        code = run(["eval", "--detections", str(dets),
                    "--annotation", str(ann_path)])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["precision"] == 1.0
        assert report["recall"] == 1.0
        assert report["f_measure"] == 1.0

    def test_size_mismatch_exit_one(self, workdir, capsys):
        tmp, _, spec_path = workdir
        scores = tmp / "scores.pses"
        run(["synth", "--spec", str(spec_path), "--out", str(scores)])
        dets = tmp / "dets.json"
        run(["pse", "--scores", str(scores), "--out", str(dets)])
        small = tmp / "small.json"
        write_annotation(small, Annotation(10, 10, []))
        assert run(["eval", "--detections", str(dets),
                    "--annotation", str(small)]) == 1
        assert "mismatch" in capsys.readouterr().err


class TestRender:
    def test_label_render_deterministic(self, workdir):
        tmp, _, spec_path = workdir
        scores = tmp / "scores.pses"
        run(["synth", "--spec", str(spec_path), "--out", str(scores)])
        labels = tmp / "labels.psel"
        run(["pse", "--scores", str(scores), "--out", str(tmp / "d.json"),
             "--labels-out", str(labels)])
        p1, p2 = tmp / "a.png", tmp / "b.png"
        assert run(["render", "--input", str(labels), "--out", str(p1)]) == 0
        assert run(["render", "--input", str(labels), "--out", str(p2)]) == 0
        assert p1.read_bytes() == p2.read_bytes()

    def test_scores_render(self, workdir):
        tmp, _, spec_path = workdir
        scores = tmp / "scores.pses"
        run(["synth", "--spec", str(spec_path), "--out", str(scores)])
        out = tmp / "scores.png"
        assert run(["render", "--input", str(scores), "--out", str(out)]) == 0
        assert out.stat().st_size > 0


class TestLoss:
    def test_loss_report_and_gradient(self, workdir, capsys):
        tmp, ann_path, _ = workdir
        labels = tmp / "labels.pses"
        run(["labelgen", "--annotation", str(ann_path), "--num-kernels", "3",
             "--min-scale", "0.5", "--out", str(labels)])
        # perfect prediction: scores equal the label masks
        stack = read_score_stack(labels)
        scores = tmp / "scores.pses"
        from psekit.formats import write_score_stack
        write_score_stack(scores, stack[:-1])
        grad_path = tmp / "grad.psef"
        code = run(["loss", "--scores", str(scores), "--labels", str(labels),
                    "--gradient-out", str(grad_path)])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["total"] == pytest.approx(0.0, abs=1e-12)
        assert report["lambda"] == 0.7
        from psekit.formats import read_float_planes
        grad = read_float_planes(grad_path)
        assert grad.shape == (1, 64, 96)

    def test_plane_count_mismatch(self, workdir, capsys):
        tmp, ann_path, spec_path = workdir
        labels = tmp / "labels.pses"
        run(["labelgen", "--annotation", str(ann_path), "--num-kernels", "3",
             "--min-scale", "0.5", "--out", str(labels)])
        scores = tmp / "scores.pses"
        run(["synth", "--spec", str(spec_path), "--out", str(scores)])
        stack = read_score_stack(scores)
        from psekit.formats import write_score_stack
        write_score_stack(scores, stack[:1])
        assert run(["loss", "--scores", str(scores), "--labels", str(labels)]) == 1


class TestConfigFile:
    def test_config_supplies_defaults_flags_win(self, workdir, capsys):
        tmp, _, spec_path = workdir
        scores = tmp / "scores.pses"
        run(["synth", "--spec", str(spec_path), "--out", str(scores)])
        config = tmp / "config.json"
        config.write_text(json.dumps({"min-area": 100000, "threshold": 0.5}))
        # config's absurd min-area filters everything
        out1 = tmp / "c1.json"
        run(["--config", str(config), "pse", "--scores", str(scores),
             "--out", str(out1)])
        assert json.loads(out1.read_text())["detections"] == []
        # explicit flag overrides the config
        out2 = tmp / "c2.json"
        run(["--config", str(config), "pse", "--scores", str(scores),
             "--min-area", "16", "--out", str(out2)])
        assert len(json.loads(out2.read_text())["detections"]) == 2
