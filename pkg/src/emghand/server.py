"""Console endpoint: a small stdlib HTTP/WebSocket server.

One port serves both the static console assets (plain GET) and the command/
telemetry protocol (WebSocket upgrade). Each client gets a reader thread
(frames -> engine commands -> queued acks/errors) and a writer thread
(control queue first, then telemetry frames from a bounded drop-oldest
subscription). Only the writer touches the socket for sends, and nothing
here can block the engine tick thread.
"""

from __future__ import annotations

import base64
import hashlib
import json
import socket
import struct
import threading
from collections import deque
from pathlib import Path

from . import protocol

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
    ".png": "image/png",
}

OP_CONT = 0x0
OP_TEXT = 0x1
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("peer closed")
        buf += chunk
    return buf


def read_frame(sock: socket.socket) -> tuple[int, bytes]:
    """One frame: (opcode, unmasked payload). Reassembles continuations."""
    opcode = None
    payload = b""
    while True:
        head = _recv_exact(sock, 2)
        fin = head[0] & 0x80
        op = head[0] & 0x0F
        masked = head[1] & 0x80
        length = head[1] & 0x7F
        if length == 126:
            length = struct.unpack(">H", _recv_exact(sock, 2))[0]
        elif length == 127:
            length = struct.unpack(">Q", _recv_exact(sock, 8))[0]
        mask = _recv_exact(sock, 4) if masked else None
        data = _recv_exact(sock, length) if length else b""
        if mask:
            data = bytes(b ^ mask[i % 4] for i, b in enumerate(data))
        if op != OP_CONT:
            opcode = op
        payload += data
        if fin:
            return opcode, payload


def write_frame(sock: socket.socket, opcode: int, payload: bytes, mask: bool = False) -> None:
    head = bytes([0x80 | opcode])
    length = len(payload)
    mask_bit = 0x80 if mask else 0
    if length < 126:
        head += bytes([mask_bit | length])
    elif length < 65536:
        head += bytes([mask_bit | 126]) + struct.pack(">H", length)
    else:
        head += bytes([mask_bit | 127]) + struct.pack(">Q", length)
    if mask:
        key = b"\x00\x01\x02\x03"  # loopback test client; masking is pro forma
        payload = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
        head += key
    sock.sendall(head + payload)


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + _WS_GUID).encode()).digest()
    return base64.b64encode(digest).decode()


class _Client:
    def __init__(self, server: "ConsoleServer", sock: socket.socket):
        self.server = server
        self.sock = sock
        self.control: deque = deque()
        self.alive = True
        self.sub = None

    def queue(self, msg: dict) -> None:
        self.control.append(msg)

    def close(self) -> None:
        self.alive = False
        try:
            self.sock.close()
        except OSError:
            pass
        if self.sub is not None:
            self.server.engine.unsubscribe(self.sub)


class ConsoleServer:
    """Serves the wire protocol (and optional static console) for one engine."""

    def __init__(self, engine, host: str = "127.0.0.1", port: int = 0, static_dir=None):
        self.engine = engine
        self.static_dir = Path(static_dir) if static_dir else None
        self._listener = socket.create_server((host, port))
        self.host, self.port = self._listener.getsockname()[:2]
        self._clients: list[_Client] = []
        self._clients_lock = threading.Lock()
        self._accept_thread = None
        self._running = False
        engine.add_listener(self._on_engine_message)

    # ---------------------------------------------------------------- control

    def start(self) -> None:
        self._running = True
        self._accept_thread = threading.Thread(
            target=self._accept_loop, name="console-accept", daemon=True
        )
        self._accept_thread.start()

    def stop(self) -> None:
        self._running = False
        try:
            self._listener.close()
        except OSError:
            pass
        with self._clients_lock:
            clients = list(self._clients)
        for c in clients:
            c.close()
        self.engine.remove_listener(self._on_engine_message)

    def _on_engine_message(self, msg: dict) -> None:
        with self._clients_lock:
            clients = list(self._clients)
        for c in clients:
            c.queue(msg)

    # ----------------------------------------------------------------- accept

    def _accept_loop(self) -> None:
        while self._running:
            try:
                sock, _ = self._listener.accept()
            except OSError:
                return
            threading.Thread(
                target=self._handle_connection, args=(sock,), daemon=True
            ).start()

    def _handle_connection(self, sock: socket.socket) -> None:
        try:
            sock.settimeout(5.0)
            request = b""
            while b"\r\n\r\n" not in request:
                chunk = sock.recv(4096)
                if not chunk:
                    sock.close()
                    return
                request += chunk
            head = request.split(b"\r\n\r\n", 1)[0].decode("latin-1")
            lines = head.split("\r\n")
            method, path, _ = lines[0].split(" ", 2)
            headers = {}
            for line in lines[1:]:
                if ":" in line:
                    k, v = line.split(":", 1)
                    headers[k.strip().lower()] = v.strip()
            if headers.get("upgrade", "").lower() == "websocket":
                self._serve_websocket(sock, headers)
            else:
                self._serve_static(sock, method, path)
        except (OSError, ValueError):
            try:
                sock.close()
            except OSError:
                pass

    # ----------------------------------------------------------------- static

    def _serve_static(self, sock: socket.socket, method: str, path: str) -> None:
        try:
            if method != "GET" or self.static_dir is None:
                sock.sendall(b"HTTP/1.1 404 Not Found\r\nContent-Length: 0\r\n\r\n")
                return
            rel = path.split("?", 1)[0].lstrip("/") or "index.html"
            target = (self.static_dir / rel).resolve()
            if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
                sock.sendall(b"HTTP/1.1 404 Not Found\r\nContent-Length: 0\r\n\r\n")
                return
            body = target.read_bytes()
            ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
            header = (
                f"HTTP/1.1 200 OK\r\nContent-Type: {ctype}\r\n"
                f"Content-Length: {len(body)}\r\nConnection: close\r\n\r\n"
            )
            sock.sendall(header.encode() + body)
        finally:
            try:
                sock.close()
            except OSError:
                pass

    # -------------------------------------------------------------- websocket

    def _serve_websocket(self, sock: socket.socket, headers: dict) -> None:
        key = headers.get("sec-websocket-key")
        if not key:
            sock.close()
            return
        response = (
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Accept: {accept_key(key)}\r\n\r\n"
        )
        sock.sendall(response.encode())
        sock.settimeout(0.5)

        client = _Client(self, sock)
        client.sub = self.engine.telemetry_stream()
        with self._clients_lock:
            self._clients.append(client)

        hello = self.engine.state_message()
        client.queue(hello)

        writer = threading.Thread(target=self._write_loop, args=(client,), daemon=True)
        writer.start()
        try:
            self._read_loop(client)
        finally:
            client.close()
            with self._clients_lock:
                if client in self._clients:
                    self._clients.remove(client)

    def _read_loop(self, client: _Client) -> None:
        while client.alive and self._running:
            try:
                opcode, payload = read_frame(client.sock)
            except socket.timeout:
                continue
            except (ConnectionError, OSError):
                return
            if opcode == OP_CLOSE:
                client.queue({"_op": OP_CLOSE})
                return
            if opcode == OP_PING:
                client.queue({"_op": OP_PONG, "_payload": payload})
                continue
            if opcode != OP_TEXT:
                continue
            try:
                cmd = protocol.parse_inbound(payload.decode("utf-8"))
                ack = self.engine.handle_command(cmd)
                client.queue(ack)
            except Exception as e:  # validation/state errors -> error frames
                client.queue(protocol.error_message(e))

    def _write_loop(self, client: _Client) -> None:
        sock = client.sock
        sub = client.sub
        try:
            while client.alive:
                sent = False
                while client.control:
                    msg = client.control.popleft()
                    op = msg.get("_op") if isinstance(msg, dict) else None
                    if op == OP_CLOSE:
                        write_frame(sock, OP_CLOSE, b"")
                        client.alive = False
                        return
                    if op == OP_PONG:
                        write_frame(sock, OP_PONG, msg.get("_payload", b""))
                    else:
                        write_frame(sock, OP_TEXT, protocol.encode(msg).encode("utf-8"))
                    sent = True
                frame = sub.get(timeout=0) if sub is not None else None
                if frame is not None:
                    write_frame(sock, OP_TEXT, protocol.encode(frame).encode("utf-8"))
                    sent = True
                if not sent:
                    sub._event.wait(0.002)
                    sub._event.clear()
        except (ConnectionError, OSError):
            pass
        finally:
            client.alive = False
