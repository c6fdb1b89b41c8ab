public static class xMaxReduceUtil
{
    public static int xMaxReduce(int[] x)
    {
        int r = x[0];
        foreach (int e in x) if (e > r) r = e;
        return r;
    }
}
