"""
Services package.

Operations behind the CLI:
- codec: instance / menu documents <-> domain objects
- experiments: seeded generation and batch checking
- repro: large-grid numeric reproductions
- report_artifacts: report.json, results.csv, markdown summaries
"""
