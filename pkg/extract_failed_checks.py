#!/usr/bin/env python3
import glob
import json
import os
import sys
from pathlib import Path


def extract_failed_checks(json_file_path):
    """Extract failed checks from a single report JSON file. Returns None when the file cannot be parsed."""
    try:
        with open(json_file_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (json.JSONDecodeError, FileNotFoundError, UnicodeDecodeError) as e:
        print(f"Error processing {json_file_path}: {e}")
        return None

    if not isinstance(data, dict) or 'checks' not in data:
        # column-sum payloads and figure sidecars carry no checks
        return []

    failed = []
    for check in data.get('checks', []):
        if check.get('pass', True):
            continue
        failed.append({
            'file': json_file_path,
            'report': data.get('report', 'Unknown'),
            'check': check.get('check', 'Unknown'),
            'value': check.get('value'),
            'tolerance': check.get('tolerance'),
        })
    return failed


def main():
    """Scan a directory of report JSON files and summarise the failed checks."""
    if len(sys.argv) < 2:
        print("Usage: python extract_failed_checks.py <directory_path>")
        print("Example: python extract_failed_checks.py reports/")
        sys.exit(2)

    base_dir = sys.argv[1]
    if not os.path.isabs(base_dir):
        base_dir = os.path.abspath(base_dir)

    if not os.path.isdir(base_dir):
        print(f"Error: '{base_dir}' is not a directory.")
        sys.exit(2)

    json_files = sorted(glob.glob(os.path.join(base_dir, '*.json')))
    print(f"Searching in directory: {base_dir}")
    print(f"Found {len(json_files)} JSON files to process...\n")

    if not json_files:
        print("No JSON files found in the specified directory.")
        return

    failed_checks = []
    unreadable = []
    for json_file in json_files:
        result = extract_failed_checks(json_file)
        if result is None:
            unreadable.append(json_file)
        else:
            failed_checks.extend(result)

    if failed_checks:
        print(f"Found {len(failed_checks)} failed checks:\n")
        for i, entry in enumerate(failed_checks, 1):
            print(f"=== Failure {i} ===")
            print(f"File: {Path(entry['file']).name}")
            print(f"Report: {entry['report']}")
            print(f"Check: {entry['check']}")
            print(f"Value: {entry['value']}  Tolerance: {entry['tolerance']}")
            print("\n" + "=" * 80 + "\n")

        output_file = 'failed_checks_summary.txt'
        with open(output_file, 'w', encoding='utf-8') as f:
            f.write("Failed check summary\n")
            f.write(f"Generated from {len(json_files)} JSON files in: {base_dir}\n")
            f.write(f"Found {len(failed_checks)} failed checks\n\n")
            for entry in failed_checks:
                f.write(f"{Path(entry['file']).name}\t{entry['report']}\t{entry['check']}\t"
                        f"{entry['value']}\t{entry['tolerance']}\n")
        print(f"Results saved to: {output_file}")
    else:
        print("No failed checks found in any JSON files.")

    if unreadable:
        sys.exit(1)


if __name__ == '__main__':
    main()
