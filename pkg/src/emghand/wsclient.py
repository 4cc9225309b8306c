"""Minimal WebSocket client for tests and scripted console interactions."""

from __future__ import annotations

import base64
import json
import os
import socket
import time

from .server import OP_CLOSE, OP_PING, OP_PONG, OP_TEXT, read_frame, write_frame


class WsClient:
    def __init__(self, host: str, port: int, timeout: float = 5.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        key = base64.b64encode(os.urandom(16)).decode()
        request = (
            f"GET / HTTP/1.1\r\nHost: {host}:{port}\r\n"
            "Upgrade: websocket\r\nConnection: Upgrade\r\n"
            f"Sec-WebSocket-Key: {key}\r\nSec-WebSocket-Version: 13\r\n\r\n"
        )
        self.sock.sendall(request.encode())
        response = b""
        while b"\r\n\r\n" not in response:
            chunk = self.sock.recv(4096)
            if not chunk:
                raise ConnectionError("handshake failed: closed")
            response += chunk
        status = response.split(b"\r\n", 1)[0]
        if b"101" not in status:
            raise ConnectionError(f"handshake failed: {status!r}")

    def send_json(self, obj: dict) -> None:
        write_frame(self.sock, OP_TEXT, json.dumps(obj).encode("utf-8"), mask=True)

    def recv_json(self, timeout: float = 5.0) -> dict:
        """Next text frame as a dict; transparently answers pings."""
        deadline = time.monotonic() + timeout
        while True:
            self.sock.settimeout(max(0.05, deadline - time.monotonic()))
            opcode, payload = read_frame(self.sock)
            if opcode == OP_TEXT:
                return json.loads(payload.decode("utf-8"))
            if opcode == OP_PING:
                write_frame(self.sock, OP_PONG, payload, mask=True)
            elif opcode == OP_CLOSE:
                raise ConnectionError("server closed")
            if time.monotonic() > deadline:
                raise TimeoutError("no text frame before deadline")

    def recv_until(self, predicate, timeout: float = 5.0) -> dict:
        """Skip frames until one satisfies predicate; returns it."""
        deadline = time.monotonic() + timeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TimeoutError("predicate not satisfied before deadline")
            msg = self.recv_json(timeout=remaining)
            if predicate(msg):
                return msg

    def close(self) -> None:
        try:
            write_frame(self.sock, OP_CLOSE, b"", mask=True)
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass
