import argparse
import json
import os
import yaml

parser = argparse.ArgumentParser()
parser.add_argument('--report_files', type=str, nargs='+', default=[
        f'frontier_port{i}.json' for i in range(1, 6)])
parser.add_argument('--root_path', type=str, default='.')
parser.add_argument('--methods', type=str, nargs='+', default=['ours', 'line', 'dual', 'augm'])
parser.add_argument('--save_to', type=str, default='pe_table.tex')
parser.add_argument('--save_stats_to', type=str, default='pe_stats.yaml')
args = parser.parse_args()

METHOD_NAMES = {'ours': 'Ours', 'line': 'Line', 'dual': 'Dual', 'augm': 'Augm', 'exact': 'Exact'}
STATS = ['mean', 'median']

stats = {}
for report_file in args.report_files:
    with open(os.path.join(args.root_path, report_file), 'r') as f:
        report = json.load(f)
    stats[report['metadata']['dataset']] = report['aggregates']['percentage_error']

def format_cell(method_stats, stat):
    if method_stats is None:
        return '--'
    # dagger: some points lie outside the variance range of the frontier (vertical error only)
    mark = '^\\dagger' if method_stats.get('vertical_only', 0) else ''
    return f'${method_stats[stat]:.4f}{mark}$'

s = ''
s += '\\begin{tabular}{l' + 'r' * len(STATS) * len(args.methods) + '}\n'
s += 'Dataset & ' + ' & '.join(
        f'\\multicolumn{{{len(STATS)}}}{{c}}{{{METHOD_NAMES[m]}}}' for m in args.methods) + '\\\\\n'
s += ' & ' + ' & '.join(' & '.join(STATS) for _ in args.methods) + '\\\\\n'
s += '\\hline\n'
for dataset, dataset_stats in stats.items():
    s += dataset + ' & ' + ' & '.join(
            format_cell(dataset_stats.get(m), stat) for m in args.methods for stat in STATS
            ) + '\\\\\n'
s += '\\hline\n'
s += '\\end{tabular}\n'

print(s)

if args.save_to:
    with open(args.save_to, 'w') as f:
        f.write(s)

if args.save_stats_to:
    with open(args.save_stats_to, 'w') as f:
        yaml.safe_dump(stats, f)
