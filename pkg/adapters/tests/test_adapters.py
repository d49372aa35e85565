"""Adapter contract tests: every emitted corpus must satisfy the toolkit.

All checks against the primary toolkit go through its command line; the
GSEB and manifest bytes themselves come from this package's own writers.
"""

import pytest

from goldenbench_adapters import gseb
from goldenbench_adapters.embed import main as embed_main
from goldenbench_adapters.manifest_io import load_manifest
from goldenbench_adapters.mos import main as mos_main
from goldenbench_adapters.synthesize import main as synth_main
from goldenbench_adapters.transcribe import main as transcribe_main

from conftest import PROMPTS, build_corpus, run_primary, validate_ok


def synth_offline(sample_corpus, outdir):
    code = synth_main(
        ["--manifest", str(sample_corpus), "--outdir", str(outdir), "--backend", "offline"]
    )
    assert code == 0
    return outdir / "corpus.manifest.jsonl"


class TestSynthesize:
    def test_three_clip_sample_validates(self, sample_corpus, tmp_path):
        manifest = synth_offline(sample_corpus, tmp_path / "out")
        validate_ok(manifest)

    def test_golden_lines_and_audio_counts(self, sample_corpus, tmp_path):
        outdir = tmp_path / "out"
        manifest = synth_offline(sample_corpus, outdir)
        doc = load_manifest(manifest)
        golden = [u for u in doc.utterances() if u["role"] == "golden"]
        assert len(golden) == 3
        for utt in golden:
            assert (outdir / "wav" / f"{utt['id']}.wav").is_file()
        # originals are copied alongside, making the corpus self-contained
        originals = [u for u in doc.utterances() if u["role"] == "original"]
        assert all((outdir / "wav" / f"{u['id']}.wav").is_file() for u in originals)

    def test_counting_contract_two_speakers_three_prompts(self, tmp_path):
        corpus = build_corpus(
            tmp_path / "orig",
            {
                "ann": [(f"p{i}", PROMPTS[i % 3]) for i in range(3)],
                "ben": [(f"p{i}", PROMPTS[(i + 1) % 3]) for i in range(3)],
            },
        )
        outdir = tmp_path / "out"
        manifest = synth_offline(corpus, outdir)
        doc = load_manifest(manifest)
        golden = [u for u in doc.utterances() if u["role"] == "golden"]
        assert len(golden) == 6
        assert sum(1 for _ in (outdir / "wav").glob("*_gld.wav")) == 6
        validate_ok(manifest)

    def test_rerun_is_deterministic(self, sample_corpus, tmp_path):
        first = synth_offline(sample_corpus, tmp_path / "a")
        second = synth_offline(sample_corpus, tmp_path / "b")
        assert first.read_bytes() == second.read_bytes()

    def test_provenance_comment_present(self, sample_corpus, tmp_path):
        manifest = synth_offline(sample_corpus, tmp_path / "out")
        text = manifest.read_text()
        assert "# adapter=synthesize backend=offline" in text


class TestTranscribe:
    def test_hypotheses_written_and_validate(self, sample_corpus, tmp_path):
        manifest = synth_offline(sample_corpus, tmp_path / "out")
        assert transcribe_main(["--manifest", str(manifest), "--backend", "offline"]) == 0
        doc = load_manifest(manifest)
        for utt in doc.utterances():
            assert utt["hyp"] == utt["prompt"]
        validate_ok(manifest)

    def test_missing_audio_skipped_not_fatal(self, sample_corpus, tmp_path, capsys):
        manifest = synth_offline(sample_corpus, tmp_path / "out")
        victim = tmp_path / "out" / "wav" / "ann_p2.wav"
        victim.unlink()
        assert transcribe_main(["--manifest", str(manifest), "--backend", "offline"]) == 0
        assert "ann_p2" in capsys.readouterr().err
        doc = load_manifest(manifest)
        by_id = {u["id"]: u for u in doc.utterances()}
        assert "hyp" not in by_id["ann_p2"]
        assert by_id["ben_p1"]["hyp"]
        validate_ok(manifest)

    def test_empty_prompt_gives_empty_hypothesis(self, tmp_path):
        corpus = build_corpus(tmp_path / "orig", {"ann": [("p1", "")]})
        assert transcribe_main(["--manifest", str(corpus), "--backend", "offline"]) == 0
        doc = load_manifest(corpus)
        assert doc.utterances()[0]["hyp"] == ""
        validate_ok(corpus)


class TestEmbed:
    def test_speaker_embeddings_single_frame(self, sample_corpus, tmp_path):
        manifest = synth_offline(sample_corpus, tmp_path / "out")
        code = embed_main(
            ["--manifest", str(manifest), "--kind", "speaker", "--backend", "dsp"]
        )
        assert code == 0
        doc = load_manifest(manifest)
        dims = set()
        for utt in doc.utterances():
            path = tmp_path / "out" / utt["spk_emb"]
            values = gseb.unpack(path.read_bytes())
            assert values.shape[0] == 1
            dims.add(values.shape[1])
        assert len(dims) == 1
        validate_ok(manifest)
        # the toolkit itself must be able to consume the embeddings
        proc = run_primary("secs", "--manifest", str(manifest), "--role", "golden")
        assert proc.returncode == 0, proc.stderr

    def test_frame_embeddings_many_frames(self, sample_corpus, tmp_path):
        manifest = synth_offline(sample_corpus, tmp_path / "out")
        code = embed_main(["--manifest", str(manifest), "--kind", "frame", "--backend", "dsp"])
        assert code == 0
        doc = load_manifest(manifest)
        for utt in doc.utterances():
            values = gseb.unpack((tmp_path / "out" / utt["frame_emb"]).read_bytes())
            assert values.shape[0] > 1  # sub-second clip still has dozens of frames
        validate_ok(manifest)
        dtw_out = tmp_path / "dtw.jsonl"
        proc = run_primary(
            "dtw", "--manifest", str(manifest), "--out", str(dtw_out), "--role", "golden"
        )
        assert proc.returncode == 0, proc.stderr

    def test_process_pool_matches_sequential(self, sample_corpus, tmp_path):
        m1 = synth_offline(sample_corpus, tmp_path / "a")
        m2 = synth_offline(sample_corpus, tmp_path / "b")
        assert embed_main(["--manifest", str(m1), "--kind", "frame", "--backend", "dsp"]) == 0
        assert (
            embed_main(
                ["--manifest", str(m2), "--kind", "frame", "--backend", "dsp", "--workers", "2"]
            )
            == 0
        )
        for utt in load_manifest(m1).utterances():
            a = (tmp_path / "a" / f"emb/frame/{utt['id']}.gseb").read_bytes()
            b = (tmp_path / "b" / f"emb/frame/{utt['id']}.gseb").read_bytes()
            assert a == b


class TestMos:
    def test_scores_in_range_and_validate(self, sample_corpus, tmp_path):
        manifest = synth_offline(sample_corpus, tmp_path / "out")
        assert mos_main(["--manifest", str(manifest), "--backend", "dsp"]) == 0
        doc = load_manifest(manifest)
        for utt in doc.utterances():
            assert 1.0 <= utt["mos"] <= 5.0
        validate_ok(manifest)
        proc = run_primary("mos", "--manifest", str(manifest), "--role", "golden")
        assert proc.returncode == 0, proc.stderr

    def test_rerun_deterministic(self, sample_corpus, tmp_path):
        a = synth_offline(sample_corpus, tmp_path / "a")
        b = synth_offline(sample_corpus, tmp_path / "b")
        assert mos_main(["--manifest", str(a), "--backend", "dsp"]) == 0
        assert mos_main(["--manifest", str(b), "--backend", "dsp"]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestFullPipeline:
    def test_report_runs_on_fully_adapted_corpus(self, sample_corpus, tmp_path):
        manifest = synth_offline(sample_corpus, tmp_path / "out")
        assert transcribe_main(["--manifest", str(manifest), "--backend", "offline"]) == 0
        assert embed_main(["--manifest", str(manifest), "--kind", "speaker", "--backend", "dsp"]) == 0
        assert embed_main(["--manifest", str(manifest), "--kind", "frame", "--backend", "dsp"]) == 0
        assert mos_main(["--manifest", str(manifest), "--backend", "dsp"]) == 0
        validate_ok(manifest)
        proc = run_primary("report", "--manifest", str(manifest))
        assert proc.returncode == 0, proc.stderr
        assert "golden" in proc.stdout

    def test_adapters_only_produce_assets(self, sample_corpus, tmp_path):
        # No metric values anywhere in the emitted manifest: only corpus
        # fields (mos is ingested data, not a computed metric result).
        manifest = synth_offline(sample_corpus, tmp_path / "out")
        doc = load_manifest(manifest)
        allowed = {
            "kind", "id", "speaker", "role", "pair_id", "prompt",
            "hyp", "spk_emb", "frame_emb", "mos", "scores", "group",
        }
        for entry in doc.utterances() + doc.speakers():
            assert set(entry) <= allowed


class TestBackendErrors:
    def test_unknown_backend_rejected(self, sample_corpus, tmp_path, capsys):
        with pytest.raises(SystemExit):
            synth_main(
                [
                    "--manifest", str(sample_corpus),
                    "--outdir", str(tmp_path / "out"),
                    "--backend", "nope",
                ]
            )

    def test_unavailable_neural_backend_errors_cleanly(self, sample_corpus, capsys):
        try:
            import whisperx  # noqa: F401

            pytest.skip("whisperx installed in this environment")
        except ImportError:
            pass
        code = transcribe_main(["--manifest", str(sample_corpus), "--backend", "whisperx"])
        assert code == 1
        assert "whisperx" in capsys.readouterr().err
