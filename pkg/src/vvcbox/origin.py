"""HTTP origin for packaged presentations: static files with byte ranges,
plus clocked availability and per-request manifest regeneration when a
live session is attached."""
from __future__ import annotations

import re
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .fmp4 import shift_segment
from .live import LiveSession, SystemClock
from .mpd import expand_template

CONTENT_TYPES = {
    ".mpd": "application/dash+xml",
    ".m3u8": "application/vnd.apple.mpegurl",
    ".mp4": "video/mp4",
    ".m4s": "video/iso.segment",
    ".ts": "video/mp2t",
    ".vvc": "application/octet-stream",
    ".266": "application/octet-stream",
}


class SessionStatus(BaseModel):
    live: bool
    manifest: str | None = None
    published_segments: int = 0
    total_segments: int | None = None
    loop: bool = False


def content_type_for(name: str) -> str:
    return CONTENT_TYPES.get(Path(name).suffix.lower(), "application/octet-stream")


def parse_range(header: str, size: int) -> tuple[int, int] | None:
    m = re.fullmatch(r"bytes=(\d*)-(\d*)", header.strip())
    if not m or (not m.group(1) and not m.group(2)):
        return None
    if m.group(1):
        start = int(m.group(1))
        end = int(m.group(2)) if m.group(2) else size - 1
    else:
        start = max(size - int(m.group(2)), 0)
        end = size - 1
    if start >= size or start > end:
        return None
    return start, min(end, size - 1)


def _file_response(path: Path, request: Request) -> Response:
    data = path.read_bytes()
    ctype = content_type_for(path.name)
    range_header = request.headers.get("range")
    if range_header:
        rng = parse_range(range_header, len(data))
        if rng is None:
            return Response(status_code=416, headers={"Content-Range": f"bytes */{len(data)}"})
        start, end = rng
        return Response(
            content=data[start:end + 1],
            status_code=206,
            media_type=ctype,
            headers={
                "Content-Range": f"bytes {start}-{end}/{len(data)}",
                "Accept-Ranges": "bytes",
            },
        )
    return Response(content=data, media_type=ctype, headers={"Accept-Ranges": "bytes"})


def _segment_number(template: str, name: str) -> int | None:
    pattern = re.escape(template).replace(re.escape("$Number$"), r"(\d+)")
    m = re.fullmatch(pattern, name)
    return int(m.group(1)) if m else None


def create_app(root_dir: Path, session: LiveSession | None = None, clock=None) -> FastAPI:
    root = Path(root_dir).resolve()
    clk = clock if clock is not None else SystemClock()
    app = FastAPI(title="vvcbox origin", docs_url=None, redoc_url=None)

    @app.get("/_status", response_model=SessionStatus)
    def status() -> SessionStatus:
        if session is None:
            return SessionStatus(live=False)
        return SessionStatus(
            live=True,
            manifest=session.manifest_name,
            published_segments=session.pace(clk.now()),
            total_segments=None if session.loop else session.segment_count,
            loop=session.loop,
        )

    @app.get("/{file_path:path}")
    def serve(file_path: str, request: Request) -> Response:
        if not file_path or file_path.endswith("/"):
            return PlainTextResponse("not found", status_code=404)
        candidate = (root / file_path).resolve()
        if not candidate.is_relative_to(root):
            return PlainTextResponse("path traversal rejected", status_code=403)

        if session is not None:
            now = clk.now()
            if file_path == session.manifest_name:
                return Response(content=session.dynamic_mpd(now),
                                media_type="application/dash+xml")
            number = _segment_number(session.media_template, file_path)
            if number is not None:
                if now < session.availability_time(number) or \
                        (not session.loop and number > session.segment_count):
                    return PlainTextResponse(
                        f"segment {number} not yet available", status_code=404)
                session.pace(now)
                real, shift = session.resolve_segment(number)
                real_path = root / expand_template(session.media_template, real)
                if not real_path.is_file():
                    return PlainTextResponse("not found", status_code=404)
                if shift == 0 and real == number:
                    return _file_response(real_path, request)
                data = shift_segment(real_path.read_bytes(), number, shift)
                return Response(content=data, media_type=content_type_for(file_path))

        if not candidate.is_file():
            return PlainTextResponse("not found", status_code=404)
        return _file_response(candidate, request)

    return app


def http_serve(root_dir: Path, session: LiveSession | None, bind_addr: str,
               clock=None) -> None:
    """Run the origin until interrupted. bind_addr is 'host:port'."""
    import uvicorn

    host, _, port = bind_addr.rpartition(":")
    app = create_app(root_dir, session, clock)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
