import sys
import hydra
from omegaconf import DictConfig
from cardqp.cli import run_command

@hydra.main(config_path='hydra_cfg', config_name='config', version_base='1.2')
def coordinator(cfg : DictConfig) -> None:
    code = run_command('frontier', cfg)
    if code:
        sys.exit(code)

if __name__ == '__main__':
    coordinator()  # pylint: disable=no-value-for-parameter
