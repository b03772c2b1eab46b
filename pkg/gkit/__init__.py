__title__ = 'Garland Kit'
__version__ = '0.1'
__schema__ = 'garland-kit/1'
