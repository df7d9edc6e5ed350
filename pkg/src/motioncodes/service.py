"""Annotation service: clip manifest, taxonomy tree, append-only JSONL store.

Reads are lock-free over immutable snapshots; annotation writes are
serialized through a single lock and appended one JSON object per line, so
a crash can lose at most the line being written.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .taxonomy import CodeError, decision_tree, parse_code, verbs_for_code


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class Clip:
    id: str
    uri: str
    noun: str | None = None
    verb: str | None = None


@dataclass(frozen=True)
class Manifest:
    clips: tuple[Clip, ...]

    def __post_init__(self) -> None:
        ids = [c.id for c in self.clips]
        if len(set(ids)) != len(ids):
            raise ManifestError("duplicate clip ids in manifest")

    def get(self, clip_id: str) -> Clip | None:
        for clip in self.clips:
            if clip.id == clip_id:
                return clip
        return None


def load_manifest(path: str | Path) -> Manifest:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict) or not isinstance(doc.get("clips"), list):
        raise ManifestError('manifest must be {"clips": [...]}')
    clips = []
    for entry in doc["clips"]:
        if not isinstance(entry.get("id"), str) or not isinstance(entry.get("uri"), str):
            raise ManifestError("each clip needs string id and uri")
        clips.append(
            Clip(entry["id"], entry["uri"], entry.get("noun"), entry.get("verb"))
        )
    return Manifest(tuple(clips))


class AnnotationStore:
    """Append-only JSONL store; the latest line per clip wins."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        annotations: dict[str, dict] = {}
        if self.path.exists():
            with self.path.open() as fh:
                for raw in fh:
                    if raw.strip():
                        entry = json.loads(raw)
                        annotations[entry["clip_id"]] = entry
        self._snapshot = annotations

    def snapshot(self) -> dict[str, dict]:
        return self._snapshot  # replaced atomically, never mutated

    def append(self, clip_id: str, code: str, annotator: str) -> dict:
        entry = {"clip_id": clip_id, "code": code, "annotator": annotator}
        with self._lock:
            with self.path.open("a") as fh:
                fh.write(json.dumps(entry) + "\n")
                fh.flush()
            updated = dict(self._snapshot)
            updated[clip_id] = entry
            self._snapshot = updated
        return entry


def create_app(
    manifest: Manifest, store: AnnotationStore, ui_dir: str | Path | None = None
) -> FastAPI:
    app = FastAPI(title="motion-code annotation service")

    @app.get("/api/taxonomy")
    def get_taxonomy() -> dict:
        return decision_tree()

    @app.get("/api/manifest")
    def get_manifest() -> dict:
        annotated = store.snapshot()
        return {
            "clips": [
                {
                    "id": clip.id,
                    "uri": clip.uri,
                    "noun": clip.noun,
                    "verb": clip.verb,
                    "annotated": clip.id in annotated,
                }
                for clip in manifest.clips
            ]
        }

    @app.get("/api/verbs")
    def get_verbs(code: str) -> JSONResponse:
        try:
            parsed = parse_code(code)
        except CodeError as exc:
            return JSONResponse(
                {"error": "InvalidCode", "detail": str(exc)}, status_code=400
            )
        return JSONResponse({"verbs": sorted(verbs_for_code(parsed))})

    @app.post("/api/annotations")
    async def post_annotation(
        request: Request, overwrite: bool = Query(False)
    ) -> JSONResponse:
        try:
            body = await request.json()
        except Exception:
            return JSONResponse(
                {"error": "BadRequest", "detail": "body must be JSON"}, status_code=400
            )
        clip_id = body.get("clip_id")
        code_text = body.get("code")
        annotator = body.get("annotator", "anonymous")
        if not isinstance(clip_id, str) or not isinstance(code_text, str):
            return JSONResponse(
                {"error": "BadRequest", "detail": "clip_id and code are required"},
                status_code=400,
            )
        try:
            canonical = parse_code(code_text).canonical()
        except CodeError as exc:
            return JSONResponse(
                {"error": "InvalidCode", "detail": str(exc)}, status_code=400
            )
        if manifest.get(clip_id) is None:
            return JSONResponse(
                {"error": "UnknownClip", "detail": f"no clip {clip_id!r} in manifest"},
                status_code=404,
            )
        if clip_id in store.snapshot() and not overwrite:
            return JSONResponse(
                {
                    "error": "DuplicateAnnotation",
                    "detail": f"clip {clip_id!r} is already annotated; "
                    "pass ?overwrite=true to replace",
                },
                status_code=409,
            )
        entry = store.append(clip_id, canonical, str(annotator))
        return JSONResponse(entry, status_code=201)

    @app.get("/api/annotations")
    def export_annotations(format: str = Query("jsonl")) -> PlainTextResponse:
        if format != "jsonl":
            return PlainTextResponse(
                json.dumps({"error": "BadRequest", "detail": "format must be jsonl"}),
                status_code=400,
                media_type="application/json",
            )
        annotated = store.snapshot()
        lines = []
        for clip in manifest.clips:  # manifest order keeps exports deterministic
            entry = annotated.get(clip.id)
            if entry is None:
                continue
            lines.append(
                json.dumps(
                    {
                        "id": clip.id,
                        "verb": clip.verb or "",
                        "noun": clip.noun or "",
                        "code": entry["code"],
                    }
                )
            )
        return PlainTextResponse(
            "\n".join(lines) + ("\n" if lines else ""),
            media_type="application/x-ndjson",
        )

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
