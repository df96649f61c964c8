import argparse
import json
import os
import yaml

parser = argparse.ArgumentParser()
parser.add_argument('--report_files', type=str, nargs='+', default=[
        f'gaps_port{i}.json' for i in range(1, 6)])
parser.add_argument('--root_path', type=str, default='.')
parser.add_argument('--methods', type=str, nargs='+', default=['ours', 'line', 'dual', 'augm'])
parser.add_argument('--proved_only', action='store_true', default=False)
parser.add_argument('--save_to', type=str, default='gap_tables.tex')
parser.add_argument('--save_stats_to', type=str, default='gap_stats.yaml')
args = parser.parse_args()

METHOD_NAMES = {'ours': 'Ours', 'line': 'Line', 'dual': 'Dual', 'augm': 'Augm'}
STATS = ['mean', 'median', 'max', 'min']
TABLES = {'binary_gap': 'binary gaps', 'objective_gap': 'objective gaps'}

stats = {}
for report_file in args.report_files:
    with open(os.path.join(args.root_path, report_file), 'r') as f:
        report = json.load(f)
    suffix = '_proved' if args.proved_only else ''
    stats[report['metadata']['dataset']] = {
            table: report['aggregates'][table + suffix] for table in TABLES}

def format_cell(method_stats, stat):
    return '--' if method_stats is None else f'${method_stats[stat]:.4f}$'

all_tables = ''

for table, title in TABLES.items():
    s = ''
    s += '\\begin{tabular}{ll' + 'r' * len(STATS) + '}\n'
    s += '\\textbf{' + title + '} & Method & ' + ' & '.join(STATS) + '\\\\\n'
    s += '\\hline\n'
    for dataset, dataset_stats in stats.items():
        for i, m in enumerate(args.methods):
            s += (dataset if i == 0 else '') + f' & {METHOD_NAMES[m]} & ' + ' & '.join(
                    format_cell(dataset_stats[table].get(m), stat) for stat in STATS) + '\\\\\n'
        s += '\\hline\n'
    s += '\\end{tabular}\n'

    print(f'\ntable for {title}:\n')
    print(s)

    all_tables += s

if args.save_to:
    with open(args.save_to, 'w') as f:
        f.write(all_tables)

if args.save_stats_to:
    with open(args.save_stats_to, 'w') as f:
        yaml.safe_dump(stats, f)
