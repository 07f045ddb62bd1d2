"""Deterministic command-line stand-ins for external tools and backends.

Every stage of the pipeline shells out to something configurable: a frame
grabber, a markup compiler, a page renderer, and ASR/OCR/LLM services. This
module provides offline, reproducible substitutes for all of them so the
full pipeline can run (and be tested end to end) on a machine with none of
the real tools installed.

Backend subcommands (``asr``, ``ocr``, ``llm``) speak the subprocess
transport: request document on stdin, text on stdout. Tool subcommands
(``grab-frame``, ``compile-tex``, ``pdf-to-images``) mirror the argv
conventions of the real tools they replace.

The fake document chain is honest about its formats: ``compile-tex`` emits a
structurally valid PDF whose page text rides in ``% slide-text:`` base64
comment lines, and ``pdf-to-images`` turns those into real PNG files with
the text embedded both as a tEXt chunk and as a ``<image>.txt`` sidecar, so
the stub OCR can close the loop exactly.
"""

from __future__ import annotations

import argparse
import base64
import json
import re
import sys
from pathlib import Path

_SLIDE_TEXT_COMMENT = re.compile(rb"^% slide-text: ([A-Za-z0-9+/=]*)$", re.MULTILINE)

_FRAME_BODY = re.compile(r"\\begin\{frame\}(.*?)\\end\{frame\}", re.DOTALL)
_TEX_COMMAND = re.compile(r"\\[A-Za-z@]+\*?")

FAIL_MARKER = "% FAIL"


def minimal_slide_markup(text: str) -> str:
    """A compilable one-frame document carrying the chunk text verbatim."""
    return (
        "\\documentclass{beamer}\n"
        "\\begin{document}\n"
        "\\begin{frame}\n"
        f"{text}\n"
        "\\end{frame}\n"
        "\\end{document}\n"
    )


def _page_texts(source: str) -> list[str]:
    bodies = _FRAME_BODY.findall(source)
    if not bodies:
        begin = source.find("\\begin{document}")
        end = source.find("\\end{document}")
        bodies = [source[begin + len("\\begin{document}") : end] if begin != -1 and end != -1 else source]
    pages = []
    for body in bodies:
        text = _TEX_COMMAND.sub(" ", body).replace("{", " ").replace("}", " ")
        pages.append(" ".join(text.split()))
    return pages


def write_minimal_pdf(path: str, pages: list[str]) -> None:
    """Write a small but structurally valid PDF, one page per entry.

    Page text is carried in ``% slide-text:`` base64 comment lines (legal
    PDF comments), which keeps the writer free of fonts and encodings while
    letting the renderer recover the text byte-exactly.
    """
    pages = pages or [""]
    n = len(pages)
    chunks: list[bytes] = [b"%PDF-1.4\n"]
    for text in pages:
        encoded = base64.b64encode(text.encode("utf-8")).decode("ascii")
        chunks.append(f"% slide-text: {encoded}\n".encode("ascii"))

    offsets: dict[int, int] = {}
    position = sum(len(c) for c in chunks)

    def emit(obj_num: int, body: bytes) -> None:
        nonlocal position
        offsets[obj_num] = position
        blob = f"{obj_num} 0 obj\n".encode("ascii") + body + b"\nendobj\n"
        chunks.append(blob)
        position += len(blob)

    kids = " ".join(f"{3 + 2 * i} 0 R" for i in range(n))
    emit(1, b"<< /Type /Catalog /Pages 2 0 R >>")
    emit(2, f"<< /Type /Pages /Kids [{kids}] /Count {n} >>".encode("ascii"))
    for i in range(n):
        page_obj = 3 + 2 * i
        content_obj = page_obj + 1
        emit(
            page_obj,
            (
                "<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] "
                f"/Contents {content_obj} 0 R >>"
            ).encode("ascii"),
        )
        stream = b"BT ET"
        emit(
            content_obj,
            f"<< /Length {len(stream)} >>\nstream\n".encode("ascii")
            + stream
            + b"\nendstream",
        )

    total_objects = 2 + 2 * n
    xref_position = position
    xref = [f"xref\n0 {total_objects + 1}\n".encode("ascii"), b"0000000000 65535 f \n"]
    for obj_num in range(1, total_objects + 1):
        xref.append(f"{offsets[obj_num]:010d} 00000 n \n".encode("ascii"))
    chunks.extend(xref)
    chunks.append(
        (
            f"trailer\n<< /Size {total_objects + 1} /Root 1 0 R >>\n"
            f"startxref\n{xref_position}\n%%EOF\n"
        ).encode("ascii")
    )
    Path(path).write_bytes(b"".join(chunks))


def read_pdf_page_texts(path: str) -> list[str]:
    data = Path(path).read_bytes()
    return [
        base64.b64decode(m).decode("utf-8")
        for m in _SLIDE_TEXT_COMMENT.findall(data)
    ]


# -- tool subcommands -----------------------------------------------------


def _cmd_grab_frame(args: argparse.Namespace) -> int:
    try:
        import cv2
    except ImportError:
        print("grab-frame needs opencv (install the test extra)", file=sys.stderr)
        return 1
    capture = cv2.VideoCapture(args.video)
    if not capture.isOpened():
        print(f"cannot open video: {args.video}", file=sys.stderr)
        return 1
    try:
        fps = capture.get(cv2.CAP_PROP_FPS) or 0.0
        total = int(capture.get(cv2.CAP_PROP_FRAME_COUNT))
        index = int(round(args.timestamp * fps)) if fps > 0 else 0
        index = max(0, min(index, total - 1))
        capture.set(cv2.CAP_PROP_POS_FRAMES, index)
        ok, frame = capture.read()
        if not ok:
            print(f"cannot decode a frame at {args.timestamp}s", file=sys.stderr)
            return 1
        if not cv2.imwrite(args.output, frame):
            print(f"cannot write image: {args.output}", file=sys.stderr)
            return 1
    finally:
        capture.release()
    return 0


def _cmd_compile_tex(args: argparse.Namespace) -> int:
    source_path = Path(args.source)
    if not source_path.exists():
        print(f"no such source file: {args.source}", file=sys.stderr)
        return 1
    source = source_path.read_text(encoding="utf-8")
    if FAIL_MARKER in source:
        print("forced failure marker present in source", file=sys.stderr)
        return 1
    if "\\documentclass" not in source:
        print("source has no \\documentclass preamble", file=sys.stderr)
        return 1
    out = Path(args.outdir) / (source_path.stem + ".pdf")
    write_minimal_pdf(str(out), _page_texts(source))
    return 0


def _cmd_pdf_to_images(args: argparse.Namespace) -> int:
    try:
        from PIL import Image
        from PIL.PngImagePlugin import PngInfo
    except ImportError:
        print("pdf-to-images needs Pillow (install the test extra)", file=sys.stderr)
        return 1
    if not Path(args.pdf).exists():
        print(f"no such document: {args.pdf}", file=sys.stderr)
        return 1
    pages = read_pdf_page_texts(args.pdf)
    if not pages:
        print("document carries no slide-text pages", file=sys.stderr)
        return 1
    for number, text in enumerate(pages, start=1):
        image = Image.new("RGB", (800, 600), "white")
        info = PngInfo()
        info.add_text("slide_text", text)
        out = f"{args.prefix}-{number}.png"
        image.save(out, pnginfo=info)
        Path(out + ".txt").write_text(text, encoding="utf-8")
    return 0


# -- backend subcommands (subprocess transport: JSON in, text out) ---------


def _read_document() -> dict:
    return json.load(sys.stdin)


def _media_path(document: dict, field: str) -> str | None:
    media = document.get(field)
    if isinstance(media, dict):
        return media.get("path")
    return None


def _cmd_asr(args: argparse.Namespace) -> int:
    document = _read_document()
    table: dict[str, str] = {}
    if args.table:
        table = json.loads(Path(args.table).read_text(encoding="utf-8"))
    audio = _media_path(document, "audio") or ""
    segment = document.get("segment") or {}
    stem = Path(audio).stem
    key = f"{stem}/{segment['id']}" if segment.get("id") else stem
    if key in table:
        text = table[key]
    elif args.default is not None:
        text = args.default
    else:
        print(f"no canned transcript for {key!r}", file=sys.stderr)
        return 1
    print(text)
    return 0


def _cmd_ocr(args: argparse.Namespace) -> int:
    document = _read_document()
    image = _media_path(document, "image")
    if not image:
        print("request document carries no image path", file=sys.stderr)
        return 1
    sidecar = Path(image + ".txt")
    if sidecar.exists():
        print(sidecar.read_text(encoding="utf-8"))
        return 0
    try:
        from PIL import Image
    except ImportError:
        Image = None
    if Image is not None and Path(image).exists():
        with Image.open(image) as handle:
            text = handle.text.get("slide_text") if hasattr(handle, "text") else None
        if text is not None:
            print(text)
            return 0
    if args.table:
        table = json.loads(Path(args.table).read_text(encoding="utf-8"))
        name = Path(image).name
        if name in table:
            print(table[name])
            return 0
    print(f"no extraction available for {image!r}", file=sys.stderr)
    return 1


def _cmd_llm(args: argparse.Namespace) -> int:
    document = _read_document()
    messages = document.get("prompt", {}).get("messages", [])
    user = next((m["content"] for m in messages if m.get("role") == "user"), "")
    marker = "from the following text:"
    if marker in user:
        chunk = user.split(marker, 1)[1]
        print(minimal_slide_markup(chunk))
    else:
        print(user)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="slidescribe-stubtool",
        description="deterministic offline stand-ins for external tools and backends",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    grab = commands.add_parser("grab-frame", help="extract one video frame")
    grab.add_argument("video")
    grab.add_argument("timestamp", type=float)
    grab.add_argument("output")
    grab.set_defaults(run=_cmd_grab_frame)

    compile_tex = commands.add_parser("compile-tex", help="fake markup compiler")
    compile_tex.add_argument("source")
    compile_tex.add_argument("outdir")
    compile_tex.set_defaults(run=_cmd_compile_tex)

    render = commands.add_parser("pdf-to-images", help="fake page renderer")
    render.add_argument("pdf")
    render.add_argument("prefix")
    render.set_defaults(run=_cmd_pdf_to_images)

    asr = commands.add_parser("asr", help="canned-transcript backend")
    asr.add_argument("--table", help="JSON file mapping audio keys to transcripts")
    asr.add_argument("--default", help="transcript for keys missing from the table")
    asr.set_defaults(run=_cmd_asr)

    ocr = commands.add_parser("ocr", help="sidecar/metadata-reading backend")
    ocr.add_argument("--table", help="JSON file mapping image basenames to text")
    ocr.set_defaults(run=_cmd_ocr)

    llm = commands.add_parser("llm", help="deterministic slide-markup backend")
    llm.set_defaults(run=_cmd_llm)

    args = parser.parse_args(argv)
    return args.run(args)


if __name__ == "__main__":
    sys.exit(main())
