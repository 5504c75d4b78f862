#!/usr/bin/env python3
"""
Start the Planar Forest Ends analysis API
"""

import logging
import os
import sys

import uvicorn

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def main():
    print("Planar Forest Ends API")
    print("======================")

    if not os.path.exists("forestends"):
        print("Error: Please run this from the project root directory")
        return 1

    port = int(os.environ.get("FORESTENDS_PORT", "8000"))
    print(f"\nAPI documentation: http://localhost:{port}/docs")
    print("Press Ctrl+C to stop.")
    try:
        uvicorn.run("forestends.main:app", host="0.0.0.0", port=port, log_level="info")
    except KeyboardInterrupt:
        print("\nStopping service...")
    return 0


if __name__ == "__main__":
    sys.exit(main())
