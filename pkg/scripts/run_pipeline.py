"""Run the complete pipeline."""

import sys

from config import load_settings, setup_logging
from errors import ConvQError
from pipeline.orchestrator import PipelineOrchestrator

if __name__ == '__main__':
    if len(sys.argv) != 2:
        print("Usage: python -m scripts.run_pipeline <config file>")
        sys.exit(1)

    setup_logging()
    print("Running complete pipeline...")

    try:
        settings = load_settings(sys.argv[1])
        manifest = PipelineOrchestrator(settings, display=False).run()
    except ConvQError as e:
        print(f"Pipeline failed: {e}")
        sys.exit(1)

    print(f"\nPipeline completed. Stages: {', '.join(manifest['stages'])}; {len(manifest['outputs'])} output files.")
