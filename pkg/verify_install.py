#!/usr/bin/env python3
"""
Quick check that the numeric stack and the pipeline modules import
"""

import importlib
import sys

REQUIRED_PACKAGES = ['mpmath', 'pandas', 'numpy', 'pydantic']
OPTIONAL_PACKAGES = ['gmpy2']
MODULES = ['mpnum', 'qseries', 'hypergeom', 'weierstrass', 'divpoly', 'cmcoeffs', 'piengine', 'verify_suites']


def check_dependencies():
    """Required packages must import; optional ones only speed things up."""
    missing = []
    for package in REQUIRED_PACKAGES:
        try:
            importlib.import_module(package)
            print(f"✅ {package} - OK")
        except ImportError:
            print(f"❌ {package} - MISSING")
            missing.append(package)

    for package in OPTIONAL_PACKAGES:
        try:
            importlib.import_module(package)
            print(f"✅ {package} - OK")
        except ImportError:
            print(f"⚠️  {package} - UNAVAILABLE (binary splitting falls back to Python ints)")

    return not missing


def check_modules():
    ok = True
    for name in MODULES:
        try:
            importlib.import_module(name)
            print(f"✅ {name} - OK")
        except ImportError as e:
            print(f"❌ {name} - ERROR ({e})")
            ok = False
    return ok


def check_smoke():
    """35 digits from the fastest series."""
    try:
        from piengine import compute_pi, formula_for
        digits = compute_pi(formula_for(163), 35)
    except Exception as e:
        print(f"❌ compute_pi - ERROR ({e})")
        return False
    if digits != "3.14159265358979323846264338327950288":
        print(f"❌ compute_pi - WRONG DIGITS {digits}")
        return False
    print(f"✅ compute_pi - {digits}")
    return True


def main():
    print("🔍 Chudnovsky Pi - Install Verification")
    print("=" * 50)

    all_good = True

    print("\n📦 Checking Dependencies...")
    if not check_dependencies():
        all_good = False

    print("\n🧮 Checking Modules...")
    if not check_modules():
        all_good = False

    print("\n🚀 Checking Pi Engine...")
    if all_good and not check_smoke():
        all_good = False

    print("\n" + "=" * 50)

    if all_good:
        print("🎉 All checks passed!")
        print("\n📋 Next Steps:")
        print("1. Run: python main.py pi --digits 1000")
        print("2. Run: python main.py verify")
        return 0
    else:
        print("❌ Some checks failed. Please fix the issues above.")
        print("\n🔧 Possible Solutions:")
        print("1. Run: pip install -r requirements.txt")
        print("2. Run from the project directory so the modules are importable")
        return 1


if __name__ == "__main__":
    exit_code = main()
    sys.exit(exit_code)
