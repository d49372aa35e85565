"""Model backends for the adapter scripts.

Every adapter defaults to the real external system it wraps; the neural
packages are imported lazily so the adapters install without them.  The
"offline"/"dsp" backends run the same pipelines on classical signal
processing (see dsp.py) for environments without checkpoints, and for
tests of the serialization contracts.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import audio, dsp


class BackendError(Exception):
    """A backend is unavailable or failed to load."""


def _missing(package: str, extra: str) -> BackendError:
    return BackendError(
        f"{package} is not installed; pip install 'goldenbench-adapters[{extra}]' "
        f"or pick an offline backend"
    )


# ---------------------------------------------------------------------------
# Synthesis: (text, reference wav path) -> waveform at 16 kHz
# ---------------------------------------------------------------------------


class OfflineSynth:
    name = "offline"

    def __init__(self, model: str | None, seed: int = 0):
        self.seed = seed

    def synthesize(self, text: str, reference_wav: Path) -> np.ndarray:
        ref = audio.load_mono_16k(reference_wav)
        f0 = dsp.estimate_f0(ref, audio.TARGET_RATE)
        return dsp.tone_speech(text, f0, audio.TARGET_RATE, seed=self.seed)


class YourTtsSynth:
    name = "yourtts"
    DEFAULT_MODEL = "tts_models/multilingual/multi-dataset/your_tts"

    def __init__(self, model: str | None, seed: int = 0):
        try:
            from TTS.api import TTS
        except ImportError:
            raise _missing("TTS (coqui)", "yourtts") from None
        self._tts = TTS(model or self.DEFAULT_MODEL, progress_bar=False)

    def synthesize(self, text: str, reference_wav: Path) -> np.ndarray:
        wav = self._tts.tts(text=text, speaker_wav=str(reference_wav), language="en")
        samples = np.asarray(wav, dtype=np.float32)
        rate = getattr(self._tts.synthesizer, "output_sample_rate", audio.TARGET_RATE)
        return audio.resample(samples, int(rate))


# ---------------------------------------------------------------------------
# Transcription: (wav path, prompt) -> hypothesis text
# ---------------------------------------------------------------------------


class EchoTranscriber:
    """Copies the read-aloud prompt into the hypothesis.

    A perfect-recognition stand-in that exercises the manifest plumbing;
    it performs no recognition.
    """

    name = "offline"

    def __init__(self, model: str | None):
        pass

    def transcribe(self, wav_path: Path, prompt: str) -> str:
        audio.load_mono_16k(wav_path)  # still requires readable audio
        return prompt


class WhisperxTranscriber:
    name = "whisperx"
    DEFAULT_MODEL = "medium.en"

    def __init__(self, model: str | None, device: str = "cpu"):
        try:
            import whisperx
        except ImportError:
            raise _missing("whisperx", "whisperx") from None
        self._whisperx = whisperx
        self._model = whisperx.load_model(model or self.DEFAULT_MODEL, device)

    def transcribe(self, wav_path: Path, prompt: str) -> str:
        result = self._model.transcribe(str(wav_path))
        return " ".join(seg["text"].strip() for seg in result["segments"]).strip()


# ---------------------------------------------------------------------------
# Embeddings: wav path -> (frames, dim) float32; speaker kind pools to 1 row
# ---------------------------------------------------------------------------


class DspEmbedder:
    name = "dsp"

    def __init__(self, model: str | None, device: str = "cpu"):
        pass

    def frames(self, wav_path: Path) -> np.ndarray:
        samples = audio.load_mono_16k(wav_path)
        return dsp.log_mel_frames(samples, audio.TARGET_RATE)

    def speaker(self, wav_path: Path) -> np.ndarray:
        samples = audio.load_mono_16k(wav_path)
        return dsp.speaker_vector(samples, audio.TARGET_RATE)


class Wav2Vec2Embedder:
    name = "wav2vec2"
    DEFAULT_MODEL = "facebook/wav2vec2-base"

    def __init__(self, model: str | None, device: str = "cpu"):
        try:
            import torch
            from transformers import Wav2Vec2FeatureExtractor, Wav2Vec2Model
        except ImportError:
            raise _missing("transformers/torch", "wav2vec2") from None
        self._torch = torch
        name = model or self.DEFAULT_MODEL
        self._extractor = Wav2Vec2FeatureExtractor.from_pretrained(name)
        self._model = Wav2Vec2Model.from_pretrained(name).to(device).eval()
        self._device = device

    def frames(self, wav_path: Path) -> np.ndarray:
        samples = audio.load_mono_16k(wav_path)
        inputs = self._extractor(
            samples, sampling_rate=audio.TARGET_RATE, return_tensors="pt"
        ).to(self._device)
        with self._torch.no_grad():
            hidden = self._model(**inputs).last_hidden_state
        return hidden[0].cpu().numpy().astype(np.float32)

    def speaker(self, wav_path: Path) -> np.ndarray:
        raise BackendError("wav2vec2 extracts frame features; use resemblyzer or dsp for speaker")


class ResemblyzerEmbedder:
    name = "resemblyzer"

    def __init__(self, model: str | None, device: str = "cpu"):
        try:
            from resemblyzer import VoiceEncoder, preprocess_wav
        except ImportError:
            raise _missing("resemblyzer", "resemblyzer") from None
        self._encoder = VoiceEncoder(device)
        self._preprocess = preprocess_wav

    def frames(self, wav_path: Path) -> np.ndarray:
        raise BackendError("resemblyzer produces speaker embeddings; use wav2vec2 or dsp for frames")

    def speaker(self, wav_path: Path) -> np.ndarray:
        emb = self._encoder.embed_utterance(self._preprocess(Path(wav_path)))
        return np.asarray(emb, dtype=np.float32).reshape(1, -1)


# ---------------------------------------------------------------------------
# MOS: wav path -> score in [1, 5]
# ---------------------------------------------------------------------------


class DspScorer:
    name = "dsp"

    def __init__(self, model: str | None, device: str = "cpu"):
        pass

    def score(self, wav_path: Path) -> float:
        samples = audio.load_mono_16k(wav_path)
        return dsp.quality_heuristic(samples, audio.TARGET_RATE)


class SpeechMosScorer:
    name = "speechmos"
    DEFAULT_MODEL = "tarepan/SpeechMOS:v1.2.0"

    def __init__(self, model: str | None, device: str = "cpu"):
        try:
            import torch
        except ImportError:
            raise _missing("torch", "speechmos") from None
        self._torch = torch
        self._predictor = torch.hub.load(model or self.DEFAULT_MODEL, "utmos22_strong")

    def score(self, wav_path: Path) -> float:
        samples = audio.load_mono_16k(wav_path)
        tensor = self._torch.from_numpy(samples).unsqueeze(0)
        with self._torch.no_grad():
            value = self._predictor(tensor, audio.TARGET_RATE)
        return float(value.item())


_REGISTRY = {
    "synth": {"yourtts": YourTtsSynth, "offline": OfflineSynth},
    "transcribe": {"whisperx": WhisperxTranscriber, "offline": EchoTranscriber},
    "embed": {"wav2vec2": Wav2Vec2Embedder, "resemblyzer": ResemblyzerEmbedder, "dsp": DspEmbedder},
    "mos": {"speechmos": SpeechMosScorer, "dsp": DspScorer},
}


def make_backend(task: str, name: str, *args, **kwargs):
    try:
        cls = _REGISTRY[task][name]
    except KeyError:
        choices = ", ".join(sorted(_REGISTRY[task]))
        raise BackendError(f"unknown {task} backend {name!r}; choices: {choices}") from None
    return cls(*args, **kwargs)


def backend_choices(task: str) -> list[str]:
    return sorted(_REGISTRY[task])
