#!/usr/bin/env python3
"""Check results database contents"""
import sqlite3
import sys

db_path = sys.argv[1] if len(sys.argv) > 1 else 'data/qkd_sim.db'
conn = sqlite3.connect(db_path)
c = conn.cursor()

# Check runs table
c.execute('SELECT COUNT(*) FROM runs')
count = c.fetchone()[0]
print(f'Total archived runs: {count}')

if count > 0:
    c.execute('SELECT id, label, axis, row_count, created_at FROM runs ORDER BY id DESC LIMIT 5')
    print('\nLast 5 runs:')
    for row in c.fetchall():
        axis = f' [{row[2]}]' if row[2] else ''
        print(f'  #{row[0]} {row[1]}{axis} | Rows: {row[3]:,} | Time: {row[4]}')

# Check compressed pulse ledgers
c.execute('SELECT COUNT(*), COALESCE(SUM(record_count), 0), COALESCE(SUM(LENGTH(compressed_data)), 0) FROM run_records_archive')
ledgers, records, size = c.fetchone()
print(f'\nStored pulse ledgers: {ledgers} ({records:,} records, {size / 1024:.1f} KiB compressed)')

conn.close()
