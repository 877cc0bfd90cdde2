import sys
from pathlib import Path

import pytest

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

FIXTURES = HERE / "fixtures"


def manifest_text(package="com.example.app", permissions=(), filters=(), sdk23=()):
    """Plain-text manifest. ``filters`` is a list of (actions, categories) pairs."""
    lines = [
        '<?xml version="1.0" encoding="utf-8"?>',
        f'<manifest xmlns:android="http://schemas.android.com/apk/res/android" package="{package}">',
    ]
    lines += [f'  <uses-permission android:name="{p}"/>' for p in permissions]
    lines += [f'  <uses-permission-sdk-23 android:name="{p}"/>' for p in sdk23]
    if filters:
        lines.append("  <application>")
        lines.append('    <receiver android:name=".R">')
        for actions, categories in filters:
            lines.append("      <intent-filter>")
            lines += [f'        <action android:name="{a}"/>' for a in actions]
            lines += [f'        <category android:name="{c}"/>' for c in categories]
            lines.append("      </intent-filter>")
        lines.append("    </receiver>")
        lines.append("  </application>")
    lines.append("</manifest>")
    return "\n".join(lines) + "\n"


@pytest.fixture
def fixtures_dir():
    return FIXTURES
