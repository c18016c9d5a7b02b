from pathlib import Path

import pytest

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "sail" / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


def node(text=None, bounds="[0,0][100,50]", cls="android.widget.Button", children="", **flags):
    attrs = [f'class="{cls}"', f'bounds="{bounds}"']
    if text is not None:
        attrs.append(f'text="{text}"')
    for key, value in flags.items():
        attrs.append(f'{key.replace("_", "-")}="{value}"')
    inner = f">{children}</node>" if children else "/>"
    return f"<node {' '.join(attrs)}{inner}"


def dump(*nodes, activity="a.Main"):
    """A dump with the given nodes; several nodes get a plain frame as their root."""
    body = nodes[0] if len(nodes) == 1 else node(
        None, bounds="[0,0][1080,1920]", cls="android.widget.FrameLayout", children="".join(nodes))
    return f'<hierarchy activity="{activity}">{body}</hierarchy>'


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
