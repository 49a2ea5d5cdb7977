"""Scene library: manifest loading, indexing and sampling."""

from __future__ import annotations

import bisect
import itertools
import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .level import LevelFormatError, MechanicKind, Scene, parse_level_text, serialize_level_text

log = logging.getLogger(__name__)

DEFAULT_SCENE_WIDTH = 16
DEFAULT_SCENE_HEIGHT = 14


class CorpusError(ValueError):
    """Raised for unreadable manifests or corpora with no usable scenes."""


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    mechanics: tuple[str, ...]
    id: str | None = None


@dataclass(frozen=True)
class CorpusManifest:
    entries: tuple[ManifestEntry, ...]
    scene_width: int = DEFAULT_SCENE_WIDTH
    scene_height: int = DEFAULT_SCENE_HEIGHT

    @classmethod
    def from_json(cls, data: Mapping) -> "CorpusManifest":
        entries = tuple(
            ManifestEntry(path=e["path"], mechanics=tuple(e.get("mechanics", ())), id=e.get("id"))
            for e in data.get("scenes", ())
        )
        return cls(
            entries,
            int(data.get("scene_width", DEFAULT_SCENE_WIDTH)),
            int(data.get("scene_height", DEFAULT_SCENE_HEIGHT)),
        )

    def to_json(self) -> dict:
        return {
            "scene_width": self.scene_width,
            "scene_height": self.scene_height,
            "scenes": [
                {"id": e.id, "path": e.path, "mechanics": list(e.mechanics)}
                if e.id
                else {"path": e.path, "mechanics": list(e.mechanics)}
                for e in self.entries
            ],
        }


@dataclass(frozen=True)
class Corpus:
    """Immutable scene library indexed by label-set size."""

    scenes: Mapping[str, Scene]
    scene_width: int = DEFAULT_SCENE_WIDTH
    scene_height: int = DEFAULT_SCENE_HEIGHT
    by_mechanic_count: Mapping[int, tuple[str, ...]] = field(init=False)
    skipped: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.scenes:
            raise CorpusError("corpus has no scenes")
        index: dict[int, list[str]] = {}
        for sid in sorted(self.scenes):
            index.setdefault(len(self.scenes[sid].mechanics), []).append(sid)
        object.__setattr__(self, "by_mechanic_count", {k: tuple(v) for k, v in sorted(index.items())})
        object.__setattr__(self, "_ids", tuple(sorted(self.scenes)))
        w = inverse_mechanic_weights(self)
        object.__setattr__(self, "_inverse_cum", (self._ids, list(itertools.accumulate(w[s] for s in self._ids))))

    @classmethod
    def from_scenes(cls, scenes: Iterable[Scene], **kw) -> "Corpus":
        mapping = {}
        for s in scenes:
            if s.id in mapping:
                raise CorpusError(f"duplicate scene id {s.id}")
            mapping[s.id] = s
        first = next(iter(mapping.values()), None)
        if first is not None:
            kw.setdefault("scene_width", first.width)
            kw.setdefault("scene_height", first.height)
        return cls(mapping, **kw)

    @property
    def ids(self) -> tuple[str, ...]:
        """Scene ids in sorted order."""
        return self._ids

    def __len__(self) -> int:
        return len(self.scenes)

    def __contains__(self, sid: str) -> bool:
        return sid in self.scenes

    def labels(self, sid: str) -> frozenset[MechanicKind]:
        return self.scenes[sid].mechanics

    def mechanic_count(self, sid: str) -> int:
        return len(self.scenes[sid].mechanics)

    def flat_ids(self) -> tuple[str, ...]:
        return self.by_mechanic_count.get(0, ())

    def covered_mechanics(self) -> frozenset[MechanicKind]:
        out: set[MechanicKind] = set()
        for s in self.scenes.values():
            out |= s.mechanics
        return frozenset(out)


def load_corpus(manifest_path: str | Path) -> Corpus:
    """Load every scene listed in a ``corpus.json`` manifest.

    Scenes whose files contain unknown tiles (or are otherwise malformed, or
    have the wrong size) are skipped with a warning; their ids are kept in
    ``Corpus.skipped``.

    Raises:
        CorpusError: if the manifest cannot be read or no scene loads.
    """
    manifest_path = Path(manifest_path)
    try:
        manifest = CorpusManifest.from_json(json.loads(manifest_path.read_text()))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CorpusError(f"cannot read manifest {manifest_path}: {exc}") from exc
    root = manifest_path.parent
    scenes: dict[str, Scene] = {}
    skipped: list[str] = []
    for entry in manifest.entries:
        sid = entry.id or Path(entry.path).stem
        try:
            grid = parse_level_text((root / entry.path).read_text())
            labels = frozenset(MechanicKind.from_label(m) for m in entry.mechanics)
        except (OSError, LevelFormatError, ValueError) as exc:
            log.warning("skipping scene %s: %s", sid, exc)
            skipped.append(sid)
            continue
        if (grid.width, grid.height) != (manifest.scene_width, manifest.scene_height):
            log.warning(
                "skipping scene %s: size %dx%d, expected %dx%d",
                sid, grid.width, grid.height, manifest.scene_width, manifest.scene_height,
            )
            skipped.append(sid)
            continue
        if sid in scenes:
            raise CorpusError(f"duplicate scene id {sid}")
        scenes[sid] = Scene(sid, grid, labels)
    if not scenes:
        raise CorpusError(f"no loadable scenes in {manifest_path}")
    log.info("loaded %d scenes from %s (%d skipped)", len(scenes), manifest_path, len(skipped))
    return Corpus(scenes, manifest.scene_width, manifest.scene_height, skipped=tuple(skipped))


def save_corpus(corpus: Corpus, directory: str | Path) -> Path:
    """Write scenes as ``.lvl`` files plus ``corpus.json``; returns the manifest path."""
    directory = Path(directory)
    (directory / "scenes").mkdir(parents=True, exist_ok=True)
    entries = []
    for sid in corpus.ids:
        scene = corpus.scenes[sid]
        rel = f"scenes/{sid}.lvl"
        (directory / rel).write_text(serialize_level_text(scene.grid) + "\n")
        labels = tuple(m.label for m in sorted(scene.mechanics))
        entries.append(ManifestEntry(rel, labels, sid))
    manifest = CorpusManifest(tuple(entries), corpus.scene_width, corpus.scene_height)
    path = directory / "corpus.json"
    path.write_text(json.dumps(manifest.to_json(), indent=2) + "\n")
    return path


def sample_scene_by_count(corpus: Corpus, mechanic_count: int, rng: random.Random) -> Scene:
    """Uniform scene with ``mechanic_count`` labels, else the nearest count (ties to smaller)."""
    counts = corpus.by_mechanic_count
    if mechanic_count in counts:
        pool = counts[mechanic_count]
    else:
        nearest = min(counts, key=lambda c: (abs(c - mechanic_count), c))
        pool = counts[nearest]
    return corpus.scenes[pool[rng.randrange(len(pool))]]


def linear_rank_pick(items, rng: random.Random):
    """Pick from ``items`` (best first) with weight ``len - i`` for position ``i``."""
    n = len(items)
    if n == 0:
        raise ValueError("cannot pick from an empty sequence")
    # weights n, n-1, ..., 1 -> total n(n+1)/2
    u = rng.random() * n * (n + 1) / 2
    acc = 0.0
    for i in range(n):
        acc += n - i
        if u < acc:
            return items[i]
    return items[-1]


def linear_rank_weights(values: Sequence[float]) -> list[float]:
    """Linear-rank weight per item: the lowest value gets 1, the highest gets n.

    Tied values share the mean of the ranks they span.
    """
    order = sorted(range(len(values)), key=lambda i: values[i])
    weights = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j < len(order) and values[order[j]] == values[order[i]]:
            j += 1
        shared = (i + 1 + j) / 2  # mean of ranks i+1 .. j
        for k in order[i:j]:
            weights[k] = shared
        i = j
    return weights


def weighted_index(cum: Sequence[float], rng: random.Random) -> int:
    """Index drawn from cumulative weights ``cum``."""
    return min(bisect.bisect_right(cum, rng.random() * cum[-1]), len(cum) - 1)


def inverse_mechanic_weights(corpus: Corpus) -> dict[str, float]:
    """Linear-rank weights: in descending label-count order the i-th scene weighs i+1.

    Scenes with equal counts share the mean of their ranks, so a corpus where
    every scene has the same count is sampled uniformly.
    """
    ids = corpus.ids
    return dict(zip(ids, linear_rank_weights([-corpus.mechanic_count(s) for s in ids])))


def rank_sample_inverse_mechanics(corpus: Corpus, rng: random.Random) -> Scene:
    """Draw a scene favouring fewer labelled mechanics (linear rank selection)."""
    ids, cum = corpus._inverse_cum
    return corpus.scenes[ids[weighted_index(cum, rng)]]
