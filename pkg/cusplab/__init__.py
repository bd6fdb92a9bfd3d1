__all__ = ['cli', 'config', 'contact', 'corpus', 'covering', 'errors', 'estimates', 'experiments', 'generate',
           'lattice', 'plots', 'pool', 'pucci', 'regularize', 'report', 'storage', 'utility']
