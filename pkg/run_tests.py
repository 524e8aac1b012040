#!/usr/bin/env python3
"""
Main test runner for the soot-deconvolution project.
Runs tests from the backend/tests structure.
"""

import sys
from pathlib import Path

# Add the backend directory to Python path
backend_dir = Path(__file__).parent / "backend"
sys.path.insert(0, str(backend_dir))

from tests.run_all_tests import TestRunner


def main():
    """Main entry point for running all tests"""
    print("🚀 SOOT Deconvolution - Test Suite")
    print("=" * 60)
    print("📁 Project Structure:")
    print("   📂 backend/tests/             - Unit tests (solvers, penalty, data, CLI)")
    print("   📂 backend/tests/integration/ - API tests and desk-scale acceptance runs")
    print("=" * 60)

    runner = TestRunner()
    success = runner.run_all_tests()

    print("\n" + "=" * 60)
    if success:
        print("🎉 All tests completed successfully!")
        sys.exit(0)
    else:
        print("❌ Some tests failed. Please check the output above.")
        sys.exit(1)


if __name__ == "__main__":
    main()
