public static class xAddUtil
{
    public static int[] xAdd(int[] y, int[] x)
    {
        var r = new int[y.Length];
        for (int i = 0; i < y.Length; i++) r[i] = y[i] + x[i];
        return r;
    }
}
