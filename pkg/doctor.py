#!/usr/bin/env python3
"""Doctor Script - Validate the UFE installation

Checks that the engine and CLI packages import, that their runtime
dependencies are present, that the ``ufe`` command is on PATH, and that the
built-in reference cases reproduce.
"""

import shutil
import sys
from typing import Optional

GREEN = '\033[92m'
RED = '\033[91m'
YELLOW = '\033[93m'
RESET = '\033[0m'
BOLD = '\033[1m'

REQUIRED_DEPS = [
    ('numpy', 'numpy'),
    ('pandas', 'pandas'),
    ('pygments', 'pygments'),
]

DEV_DEPS = [
    ('pytest', 'pytest'),
    ('pytest-cov', 'pytest_cov'),
    ('hypothesis', 'hypothesis'),
    ('ruff', 'ruff'),
    ('pylint', 'pylint'),
    ('mypy', 'mypy'),
    ('pydoclint', 'pydoclint'),
    ('radon', 'radon'),
    ('vulture', 'vulture'),
]

COMPONENTS = [
    ('udist', 'ufe_engine.udist'),
    ('design_data', 'ufe_engine.design_data'),
    ('linsolve', 'ufe_engine.linsolve'),
    ('estimators', 'ufe_engine.estimators'),
    ('uhtest', 'ufe_engine.uhtest'),
    ('pipeline', 'ufe_cli.pipeline'),
    ('report', 'ufe_cli.report'),
    ('golden', 'ufe_cli.golden'),
]


def _mark(passed: bool, optional: bool = False) -> str:
    if passed:
        return f"{GREEN}✓{RESET}"
    return f"{YELLOW}○{RESET}" if optional else f"{RED}✗{RESET}"


def check_python_version() -> tuple[bool, str]:
    """Check if Python version meets requirements."""
    version = sys.version.split()[0]
    if sys.version_info[:2] >= (3, 9):
        return True, f"Python {version}"
    return False, f"Python {version} (requires >= 3.9)"


def check_module(module_name: str, import_name: Optional[str] = None) -> tuple[bool, str]:
    """Check if a module is installed and importable."""
    try:
        __import__(import_name or module_name)
        return True, module_name
    except ImportError:
        return False, module_name


def check_package(dist_name: str, import_name: str) -> tuple[bool, str]:
    """Check that one of the project packages is importable and report its version."""
    try:
        module = __import__(import_name)
    except ImportError:
        return False, f"{dist_name} (NOT INSTALLED)"
    version = getattr(module, "__version__", "unknown")
    return True, f"{dist_name} {version} (from {module.__file__})"


def check_components() -> list[tuple[bool, str]]:
    results = []
    for name, module in COMPONENTS:
        try:
            __import__(module)
            results.append((True, name))
        except ImportError as e:
            results.append((False, f"{name} ({e})"))
    return results


def check_entry_point() -> tuple[bool, str]:
    path = shutil.which("ufe")
    if path is None:
        return False, "ufe (NOT FOUND on PATH)"
    return True, f"ufe ({path})"


def check_golden_cases() -> list[tuple[bool, str]]:
    """Replay the built-in reference cases at the configured tolerance."""
    try:
        from ufe_cli.golden import GOLDEN_CASES, run_golden
    except ImportError as e:
        return [(False, f"golden cases unavailable ({e})")]
    results = []
    for name in GOLDEN_CASES:
        try:
            _, mismatches = run_golden(name)
        except Exception as e:  # pylint: disable=broad-except
            results.append((False, f"{name} ({type(e).__name__}: {e})"))
            continue
        if mismatches:
            results.append((False, f"{name} ({len(mismatches)} mismatch(es))"))
        else:
            results.append((True, name))
    return results


def main() -> None:
    """Run all checks and report results."""
    print(f"{BOLD}UFE Installation Doctor{RESET}")
    print("=" * 60)
    print(f"Using Python: {sys.executable}")
    print()

    all_passed = True

    def section(title: str, results: list[tuple[bool, str]], optional: bool = False) -> bool:
        print(f"{BOLD}{title}{RESET}")
        for passed, msg in results:
            print(f"   {_mark(passed, optional)} {msg}")
        print()
        return all(passed for passed, _ in results)

    all_passed &= section("1. Python Version", [check_python_version()])
    all_passed &= section(
        "2. UFE Packages",
        [check_package("ufe-engine", "ufe_engine"), check_package("ufe-cli", "ufe_cli")],
    )
    all_passed &= section("3. UFE Components", check_components())
    all_passed &= section(
        "4. Required Dependencies", [check_module(m, i) for m, i in REQUIRED_DEPS]
    )
    entry_ok = section("5. Command Line Entry Point", [check_entry_point()])
    if not entry_ok:
        print("   Activate the environment you installed into, or use: python -m ufe_cli")
        print()
    all_passed &= entry_ok
    all_passed &= section("6. Reference Cases", check_golden_cases())
    dev_all_installed = section(
        "7. Development Dependencies (Optional)",
        [check_module(m, i) for m, i in DEV_DEPS],
        optional=True,
    )

    print("=" * 60)
    if all_passed:
        print(f"{GREEN}{BOLD}✓ All required checks passed!{RESET}")
        print()
        print("Your UFE installation is ready to use.")
        if not dev_all_installed:
            print()
            print(f"{YELLOW}Note: Some development dependencies are missing.{RESET}")
            print("To install them, run: ./install_deps.sh --dev")
    else:
        print(f"{RED}{BOLD}✗ Some checks failed.{RESET}")
        print()
        print("Common issues:")
        print("  1. Packages installed for a different Python")
        print(f"     Current Python: {sys.executable}")
        print("     Solution: Run ./install_deps.sh with this Python")
        print()
        print("  2. Packages not installed at all")
        print("     Solution: Run ./install_deps.sh")
        sys.exit(1)

    print()
    print("To analyse a dataset:")
    print("  ufe analyze --input datasets/example3.csv --design two --interaction --objective larger")


if __name__ == "__main__":
    main()
