"""Audio ingestion, speech segmentation, transcription, and feedback.

Segmentation is a plain energy gate: recording "starts" at the first run
of loud frames and "ends" once a full silence window has passed, the
same start-on-sound / end-on-silence behavior a push-free voice recorder
has. Transcription goes through a provider interface; the mock provider
(a fingerprint-to-text manifest) is the path tests exercise, live HTTP
providers are optional adapters. Feedback messages are picked uniformly
at random from a configurable list; actually voicing them is out of
scope, the text is handed to the console instead.
"""

from __future__ import annotations

import hashlib
import math
import wave
from dataclasses import dataclass
from pathlib import Path
from random import Random
from typing import Protocol, Sequence

import numpy as np
import requests

SUPPORTED_SAMPLE_RATES = (8000, 16000, 44100, 48000)

DEFAULT_FEEDBACK_MESSAGES = (
    "Listening for your command.",
    "Ready when you are.",
    "Go ahead, I am listening.",
    "Command received, on it.",
)


class AudioFormatError(ValueError):
    """Unsupported or inconsistent audio data."""


class NotUnderstoodError(RuntimeError):
    """The provider could not make out any words."""


class TranscriptionServiceError(RuntimeError):
    """The provider itself failed (connectivity, HTTP error)."""


@dataclass(frozen=True)
class AudioClip:
    """Mono PCM audio, amplitudes normalized to [-1, 1]."""

    sample_rate: int
    samples: np.ndarray

    def __post_init__(self) -> None:
        if self.sample_rate not in SUPPORTED_SAMPLE_RATES:
            raise AudioFormatError(
                f"sample rate {self.sample_rate} not in {SUPPORTED_SAMPLE_RATES}"
            )
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise AudioFormatError("samples must be a mono (1-D) array")
        if samples.size and float(np.max(np.abs(samples))) > 1.0 + 1e-9:
            raise AudioFormatError("sample amplitudes must lie in [-1, 1]")
        object.__setattr__(self, "samples", samples)

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class SegmenterConfig:
    frame: float = 0.03             # seconds per analysis frame
    start_threshold: float = 0.02   # RMS that counts as sound
    start_frames: int = 3           # consecutive loud frames to trigger
    end_threshold: float = 0.01     # RMS that counts as silence
    silence_duration: float = 1.0   # seconds of silence that ends speech

    def __post_init__(self) -> None:
        values = (
            self.frame,
            self.start_threshold,
            self.start_frames,
            self.end_threshold,
            self.silence_duration,
        )
        if any(v <= 0 for v in values):
            raise ValueError(f"segmenter config values must be positive: {self}")
        if self.end_threshold > self.start_threshold:
            raise ValueError("end_threshold must not exceed start_threshold")


def load_wav(path: str | Path) -> AudioClip:
    """Read a mono 16-bit PCM WAV file."""
    with wave.open(str(path), "rb") as wav:
        if wav.getnchannels() != 1:
            raise AudioFormatError("only mono WAV files are supported")
        if wav.getsampwidth() != 2:
            raise AudioFormatError("only 16-bit PCM WAV files are supported")
        rate = wav.getframerate()
        raw = wav.readframes(wav.getnframes())
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return AudioClip(sample_rate=rate, samples=samples)


def save_wav(clip: AudioClip, path: str | Path) -> None:
    """Write a clip as mono 16-bit PCM WAV."""
    pcm = np.clip(clip.samples * 32767.0, -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(clip.sample_rate)
        wav.writeframes(pcm.tobytes())


def clip_fingerprint(clip: AudioClip) -> str:
    """Stable identifier for a clip's exact contents."""
    digest = hashlib.sha1()
    digest.update(str(clip.sample_rate).encode())
    digest.update(np.ascontiguousarray(clip.samples).tobytes())
    return digest.hexdigest()


def _frame_rms(clip: AudioClip, frame_len: int) -> np.ndarray:
    n_frames = clip.samples.size // frame_len
    frames = clip.samples[: n_frames * frame_len].reshape(n_frames, frame_len)
    return np.sqrt(np.mean(frames * frames, axis=1))


def segment(clip: AudioClip, config: SegmenterConfig | None = None) -> AudioClip | None:
    """Cut the speech span out of a clip, or None when no speech starts.

    The span begins at the first run of `start_frames` consecutive frames
    above the start threshold and runs through the silence window that
    confirms the speaker stopped (the trailing silence_duration is kept,
    matching a recorder that stops after the silence has elapsed).
    """
    config = config or SegmenterConfig()
    frame_len = int(round(config.frame * clip.sample_rate))
    if clip.samples.size < frame_len or frame_len == 0:
        raise AudioFormatError("clip is shorter than one analysis frame")
    rms = _frame_rms(clip, frame_len)
    loud = rms > config.start_threshold
    quiet = rms < config.end_threshold
    silence_frames = math.ceil(config.silence_duration / config.frame)

    onset = None
    run = 0
    for i, is_loud in enumerate(loud):
        run = run + 1 if is_loud else 0
        if run >= config.start_frames:
            onset = i - config.start_frames + 1
            break
    if onset is None:
        return None

    end_frame = len(rms)  # speech may run to the end of the clip
    run = 0
    for j in range(onset, len(rms)):
        run = run + 1 if quiet[j] else 0
        if run >= silence_frames:
            end_frame = j + 1
            break

    start_sample = onset * frame_len
    end_sample = min(end_frame * frame_len, clip.samples.size)
    return AudioClip(
        sample_rate=clip.sample_rate,
        samples=clip.samples[start_sample:end_sample],
    )


class TranscriptionProvider(Protocol):
    def transcribe(self, clip: AudioClip, language: str = "en-US") -> str: ...


class MockTranscriber:
    """Transcripts looked up from a manifest keyed by clip fingerprint.

    Manifest file format: one `fingerprint<TAB>text` entry per line,
    blank lines and `#` comments ignored.
    """

    def __init__(self, manifest: dict[str, str] | None = None):
        self._manifest = dict(manifest or {})

    @classmethod
    def from_file(cls, path: str | Path) -> "MockTranscriber":
        manifest = {}
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, text = line.partition("\t")
            if not text:
                raise ValueError(f"manifest line has no transcript: {line!r}")
            manifest[key] = text
        return cls(manifest)

    def add(self, clip: AudioClip, text: str) -> None:
        self._manifest[clip_fingerprint(clip)] = text

    def transcribe(self, clip: AudioClip, language: str = "en-US") -> str:
        try:
            return self._manifest[clip_fingerprint(clip)]
        except KeyError:
            raise NotUnderstoodError("clip not present in manifest") from None


class HttpTranscriber:
    """Minimal adapter for a cloud STT endpoint (not exercised in CI).

    POSTs the clip as 16-bit PCM WAV bytes and expects a JSON body with a
    `text` field back.
    """

    def __init__(self, endpoint: str, api_key: str | None = None, timeout: float = 30.0):
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout = timeout

    def transcribe(self, clip: AudioClip, language: str = "en-US") -> str:
        import io

        buffer = io.BytesIO()
        pcm = np.clip(clip.samples * 32767.0, -32768, 32767).astype("<i2")
        with wave.open(buffer, "wb") as wav:
            wav.setnchannels(1)
            wav.setsampwidth(2)
            wav.setframerate(clip.sample_rate)
            wav.writeframes(pcm.tobytes())
        headers = {"Content-Type": "audio/wav", "Accept-Language": language}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = requests.post(
                self.endpoint, data=buffer.getvalue(), headers=headers, timeout=self.timeout
            )
        except requests.exceptions.RequestException as exc:
            raise TranscriptionServiceError(f"speech service unreachable: {exc}") from exc
        if response.status_code >= 400:
            raise TranscriptionServiceError(
                f"speech service returned HTTP {response.status_code}"
            )
        text = response.json().get("text", "")
        if not text:
            raise NotUnderstoodError("speech service returned no text")
        return text


def transcribe(
    provider: TranscriptionProvider, clip: AudioClip, language: str = "en-US"
) -> str:
    """Run a clip through a provider; segmentation is the caller's job."""
    return provider.transcribe(clip, language=language)


_default_rng = Random()


def select_feedback(
    messages: Sequence[str] = DEFAULT_FEEDBACK_MESSAGES,
    rng: Random | None = None,
) -> str:
    """Pick one feedback message uniformly; pass a seeded Random to replay."""
    if not messages:
        raise ValueError("feedback message list must be non-empty")
    rng = rng or _default_rng
    return rng.choice(list(messages))
