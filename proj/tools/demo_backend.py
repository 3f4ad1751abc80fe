#!/usr/bin/env python3
"""Offline chat-completions backend for trying the pipeline end to end.

Serves POST /v1/chat/completions and answers every prompt deterministically
(a pure function of the prompt text), so `--mode record` followed by
`--mode replay` reproduces identical datasets. Usage:

    python3 tools/demo_backend.py [port]
"""

import hashlib
import json
import sys
from http.server import BaseHTTPRequestHandler, HTTPServer


def tag(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:6]


def first_example_after(text: str, marker: str) -> str:
    start = text.find(marker)
    if start < 0:
        return ""
    open_pos = text.find("<example>", start)
    close_pos = text.find("</example>", open_pos)
    if open_pos < 0 or close_pos < 0:
        return ""
    return text[open_pos + len("<example>"):close_pos]


def complete(system: str, user: str) -> str:
    h = int(hashlib.sha256(user.encode()).hexdigest(), 16)
    t = tag(user)
    if system:  # judge prompts are the only ones with a system role
        pick = h % 5
        if pick in (0, 1):
            return (f"<status>Accept</status><rating>{4 + h % 4}</rating>"
                    f"<reason>clear and complete v{t}</reason>")
        if pick == 2:
            return (f"<status>Reject</status><rating>{1 + h % 3}</rating>"
                    f"<reason>insufficient v{t}</reason>")
        if pick == 3:
            return ""
        return "<status>Accept</status><rating>9</rating>"
    if user.startswith("### SYSTEM: You are an AI assistant."):
        seed = first_example_after(user, "### PROVIDED EXAMPLES")
        items = [f"<example>{seed}</example>"] + [
            f"<example>Describe aspect {i} of subject {t} in detail.</example>"
            for i in range(1, 5)
        ]
        return "\n".join(items)
    if user.startswith("### SYSTEM: You are an AI chat assistant."):
        return f"A direct and honest answer, v{t}."
    if user.startswith("<human>: I want you to act as a prompt rewriter."):
        given = user.split("#Given Prompt#:\n", 1)[-1].split("\n<bot>:", 1)[0]
        return f" Considering several robustness constraints, {given} (rewrite v{t})"
    if user.startswith("<human>: I want you to act as a prompt creator."):
        return f" Propose a rare domain question inspired by the idea, variant {t}."
    if user.startswith("<human>: Do you think the following two instructions are equal"):
        return " equal" if h % 5 == 0 else " not equal"
    if "### your task is:" in user:
        return f"Step by step: the guided explanation, v{t}. Final answer restated."
    return f"generic completion v{t}"


class Handler(BaseHTTPRequestHandler):
    def do_POST(self):  # noqa: N802 (http.server API)
        if self.path != "/v1/chat/completions":
            self.send_error(404)
            return
        length = int(self.headers.get("Content-Length", "0"))
        body = json.loads(self.rfile.read(length))
        system = ""
        user = ""
        for message in body.get("messages", []):
            if message.get("role") == "system":
                system = message.get("content", "")
            elif message.get("role") == "user":
                user = message.get("content", "")
        reply = {
            "choices": [{"message": {"role": "assistant",
                                     "content": complete(system, user)}}]
        }
        data = json.dumps(reply).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, fmt, *args):  # quiet
        pass


def main() -> None:
    port = int(sys.argv[1]) if len(sys.argv) > 1 else 8080
    server = HTTPServer(("127.0.0.1", port), Handler)
    print(f"demo backend listening on http://127.0.0.1:{port}")
    server.serve_forever()


if __name__ == "__main__":
    main()
