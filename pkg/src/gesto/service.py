"""HTTP persistence for artworks: record, store, retrieve.

Storage is one payload file per artwork plus an append-only JSONL index
log. Payload writes go through temp file, fsync, rename; the index is
replayed, reconciled against the payload directory, and compacted at every
startup. A crash at any point therefore leaves either the old state or the
new state on disk, never a readable partial.

Run with ``python -m gesto.service``; GESTO_ADDR and GESTO_DATA_DIR
override the bind address and storage directory.
"""

from __future__ import annotations

import base64
import json
import logging
import os
import secrets
import threading
import time
import zlib
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import config
from .artwork_model import decode
from .errors import ConflictError, FormatError

logger = logging.getLogger("gesto.service")


@dataclass(frozen=True)
class ArtworkRecord:
    artwork_id: str
    byte_len: int
    created_at: float
    author: str
    title: str
    checksum: int  # CRC-32 of the payload bytes

    def to_json(self) -> dict:
        return {
            "artwork_id": self.artwork_id,
            "byte_len": self.byte_len,
            "created_at": self.created_at,
            "author": self.author,
            "title": self.title,
            "checksum": self.checksum,
        }


@dataclass(frozen=True)
class SessionToken:
    token: str
    author: str
    issued_at: float


class ArtworkStore:
    """Filesystem-backed artwork storage with crash-safe writes.

    ``failpoint``, when set, is called with a label at every step of the
    write and delete paths; tests inject crashes by raising from it. The
    index dict and log appends are guarded by one lock; payload file IO
    happens outside it, so writes to different artworks never serialize.
    """

    def __init__(self, data_dir, chunk_size: int = 1 << 20, failpoint=None):
        self.root = Path(data_dir)
        self.payload_dir = self.root / "payloads"
        self.index_path = self.root / "index.log"
        self.chunk_size = int(chunk_size)
        self.failpoint = failpoint
        self._lock = threading.Lock()
        self._records: dict[str, ArtworkRecord] = {}
        self._in_flight: set[str] = set()
        self.payload_dir.mkdir(parents=True, exist_ok=True)
        self._recover()

    def _fail(self, label: str):
        if self.failpoint is not None:
            self.failpoint(label)

    def _payload_path(self, artwork_id: str) -> Path:
        return self.payload_dir / f"{artwork_id}.gstb"

    # -- startup recovery ---------------------------------------------------

    def _recover(self):
        records: dict[str, ArtworkRecord] = {}
        if self.index_path.exists():
            for line in self.index_path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                    if row["op"] == "put":
                        records[row["artwork_id"]] = ArtworkRecord(
                            artwork_id=row["artwork_id"],
                            byte_len=int(row["byte_len"]),
                            created_at=float(row["created_at"]),
                            author=row["author"],
                            title=row["title"],
                            checksum=int(row["checksum"]),
                        )
                    elif row["op"] == "del":
                        records.pop(row["artwork_id"], None)
                except (ValueError, KeyError, TypeError):
                    # a torn final line from a crashed append; drop it
                    logger.warning("skipping unreadable index line")
        # reconcile: a record without its payload file is a crashed delete
        for artwork_id in [a for a, r in records.items()
                          if not self._payload_path(a).exists()]:
            logger.warning("dropping index entry without payload: %s", artwork_id)
            del records[artwork_id]
        # payload files without a committed index row are crashed puts
        for path in self.payload_dir.glob("*.gstb"):
            if path.stem not in records:
                logger.warning("removing unindexed payload: %s", path.name)
                path.unlink()
        for path in self.payload_dir.glob("*.tmp"):
            path.unlink()
        self._records = records
        self._compact()

    def _compact(self):
        rows = [r.to_json() | {"op": "put"}
                for r in sorted(self._records.values(), key=lambda r: r.artwork_id)]
        tmp = self.root / "index.log.tmp"
        with open(tmp, "w", encoding="utf-8") as f:
            for row in rows:
                f.write(json.dumps(row) + "\n")
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, self.index_path)

    # -- write path ---------------------------------------------------------

    def _append_index(self, row: dict):
        self._fail("index_open")
        with open(self.index_path, "a", encoding="utf-8") as f:
            f.write(json.dumps(row) + "\n")
            f.flush()
            self._fail("index_written")
            os.fsync(f.fileno())
        self._fail("index_synced")

    def _write_payload(self, path: Path, data: bytes):
        tmp = path.with_name(path.name + ".tmp")
        self._fail("payload_open")
        try:
            with open(tmp, "wb") as f:
                for start in range(0, len(data), self.chunk_size):
                    f.write(data[start : start + self.chunk_size])
                    self._fail("payload_chunk")
                f.flush()
                self._fail("payload_flush")
                os.fsync(f.fileno())
            self._fail("payload_synced")
            os.replace(tmp, path)
            self._fail("payload_renamed")
        except BaseException:
            tmp.unlink(missing_ok=True)
            raise

    def put(self, payload: bytes) -> ArtworkRecord:
        """Validate, store, and index one payload. Raises FormatError for
        undecodable bodies and ConflictError for duplicate ids."""
        artwork = decode(payload)
        artwork_id = artwork.artwork_id
        with self._lock:
            if artwork_id in self._records or artwork_id in self._in_flight:
                raise ConflictError(f"artwork {artwork_id} already exists")
            self._in_flight.add(artwork_id)
        try:
            record = ArtworkRecord(
                artwork_id=artwork_id,
                byte_len=len(payload),
                created_at=artwork.created_at,
                author=artwork.author,
                title=artwork.title,
                checksum=zlib.crc32(payload) & 0xFFFFFFFF,
            )
            self._write_payload(self._payload_path(artwork_id), payload)
            with self._lock:
                # the index append is the commit point; only after it may the
                # record become visible
                self._append_index(record.to_json() | {"op": "put"})
                self._records[artwork_id] = record
            return record
        finally:
            with self._lock:
                self._in_flight.discard(artwork_id)

    def get(self, artwork_id: str) -> tuple[ArtworkRecord, bytes] | None:
        with self._lock:
            record = self._records.get(artwork_id)
        if record is None:
            return None
        return record, self._payload_path(artwork_id).read_bytes()

    def record(self, artwork_id: str) -> ArtworkRecord | None:
        with self._lock:
            return self._records.get(artwork_id)

    def delete(self, artwork_id: str) -> bool:
        """Remove payload and record; False if the id is unknown."""
        with self._lock:
            if artwork_id not in self._records or artwork_id in self._in_flight:
                return False
            self._in_flight.add(artwork_id)
        try:
            # remove the file before logging the delete: if we crash between
            # the two, recovery drops the fileless record instead of
            # resurrecting a deleted artwork
            self._payload_path(artwork_id).unlink(missing_ok=True)
            self._fail("delete_removed")
            with self._lock:
                self._append_index({"op": "del", "artwork_id": artwork_id})
                self._records.pop(artwork_id, None)
            return True
        finally:
            with self._lock:
                self._in_flight.discard(artwork_id)

    def list(
        self, author: str | None = None, limit: int = 20, after: str | None = None
    ) -> tuple[list[ArtworkRecord], str | None]:
        """Newest first, then artwork_id; keyset pagination via an opaque
        cursor. Raises ValueError for a bad cursor."""
        with self._lock:
            rows = sorted(
                self._records.values(), key=lambda r: (-r.created_at, r.artwork_id)
            )
        if author is not None:
            rows = [r for r in rows if r.author == author]
        if after is not None:
            mark = _decode_cursor(after)
            rows = [
                r for r in rows
                if (-r.created_at, r.artwork_id) > (-mark[0], mark[1])
            ]
        page = rows[:limit]
        cursor = None
        if len(rows) > limit:
            last = page[-1]
            cursor = _encode_cursor(last.created_at, last.artwork_id)
        return page, cursor

    def count(self) -> int:
        with self._lock:
            return len(self._records)

    def scrub(self) -> list[str]:
        """Ids whose stored payload no longer matches its record."""
        with self._lock:
            records = list(self._records.values())
        bad = []
        for record in records:
            path = self._payload_path(record.artwork_id)
            try:
                data = path.read_bytes()
            except OSError:
                bad.append(record.artwork_id)
                continue
            if len(data) != record.byte_len or (
                zlib.crc32(data) & 0xFFFFFFFF
            ) != record.checksum:
                bad.append(record.artwork_id)
        return bad


def _encode_cursor(created_at: float, artwork_id: str) -> str:
    raw = json.dumps({"created_at": created_at, "artwork_id": artwork_id})
    return base64.urlsafe_b64encode(raw.encode("utf-8")).decode("ascii")


def _decode_cursor(cursor: str) -> tuple[float, str]:
    try:
        row = json.loads(base64.urlsafe_b64decode(cursor.encode("ascii")))
        return float(row["created_at"]), str(row["artwork_id"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ValueError(f"bad cursor: {exc}") from exc


# ---------------------------------------------------------------------------
# HTTP layer.


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=status)


def create_app(data_dir=None, store: ArtworkStore | None = None) -> FastAPI:
    if store is None:
        store = ArtworkStore(data_dir or os.environ.get("GESTO_DATA_DIR", config.DEFAULT_DATA_DIR))
    app = FastAPI(title="gesto persistence", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.tokens = {}
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
        expose_headers=["X-Checksum-CRC32"],
    )

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        start = time.perf_counter()
        response = await call_next(request)
        logger.info(
            "%s %s -> %d (%.1f ms)",
            request.method,
            request.url.path,
            response.status_code,
            (time.perf_counter() - start) * 1e3,
        )
        return response

    def session_author(request: Request) -> str | None:
        header = request.headers.get("authorization", "")
        token = header.removeprefix("Bearer ").strip()
        session = app.state.tokens.get(token)
        return session.author if session else None

    @app.post("/v1/sessions")
    async def create_session(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "body must be a JSON object")
        author = body.get("author") if isinstance(body, dict) else None
        if not isinstance(author, str) or not author:
            return _error(400, "author must be a non-empty string")
        if len(author.encode("utf-8")) > config.MAX_AUTHOR_BYTES:
            return _error(400, f"author exceeds {config.MAX_AUTHOR_BYTES} bytes")
        token = SessionToken(secrets.token_hex(16), author, time.time())
        app.state.tokens[token.token] = token
        return JSONResponse({"token": token.token}, status_code=201)

    @app.post("/v1/artworks")
    async def upload_artwork(request: Request):
        if session_author(request) is None:
            return _error(401, "missing or unknown session token")
        body = await request.body()
        if len(body) > config.MAX_PAYLOAD_BYTES:
            return _error(413, f"payload exceeds {config.MAX_PAYLOAD_BYTES} bytes")
        try:
            record = store.put(body)
        except FormatError as exc:
            return _error(400, f"format error: {exc}")
        except ConflictError as exc:
            return _error(409, str(exc))
        return JSONResponse({"artwork_id": record.artwork_id}, status_code=201)

    @app.get("/v1/artworks/{artwork_id}")
    async def fetch_artwork(artwork_id: str):
        found = store.get(artwork_id)
        if found is None:
            return _error(404, f"no artwork {artwork_id}")
        record, payload = found
        return Response(
            content=payload,
            media_type="application/octet-stream",
            headers={"X-Checksum-CRC32": f"{record.checksum:08x}"},
        )

    @app.get("/v1/artworks")
    async def list_artworks(request: Request):
        params = request.query_params
        try:
            limit = int(params.get("limit", "20"))
        except ValueError:
            return _error(400, "limit must be an integer")
        if not 1 <= limit <= 100:
            return _error(400, "limit must be in [1, 100]")
        try:
            items, cursor = store.list(
                author=params.get("author"), limit=limit, after=params.get("after")
            )
        except ValueError as exc:
            return _error(400, str(exc))
        return {"items": [r.to_json() for r in items], "next": cursor}

    @app.delete("/v1/artworks/{artwork_id}")
    async def delete_artwork(artwork_id: str, request: Request):
        author = session_author(request)
        if author is None:
            return _error(401, "missing or unknown session token")
        record = store.record(artwork_id)
        if record is None:
            return _error(404, f"no artwork {artwork_id}")
        if record.author != author:
            return _error(403, "token author does not own this artwork")
        if not store.delete(artwork_id):
            return _error(404, f"no artwork {artwork_id}")
        return Response(status_code=204)

    @app.get("/v1/health")
    async def health():
        return {"status": "ok", "artworks": store.count()}

    return app


def main():
    import uvicorn

    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    addr = os.environ.get("GESTO_ADDR", config.DEFAULT_ADDR)
    host, _, port = addr.rpartition(":")
    uvicorn.run(create_app(), host=host or "127.0.0.1", port=int(port),
                log_level="warning", access_log=False)


if __name__ == "__main__":
    main()
